#pragma once

#include <iosfwd>
#include <string>

#include "ctcfar/sim.hpp"

namespace ctcfar {

// RDC1 layout (little-endian):
//   "RDC1", u32 N, u32 M, u32 L,
//   f64 f_c, f64 slope, f64 f_s, f64 T_c, f64 T_PRI, f64 d,
//   N*M*L pairs of f32 (re, im), channel-major, then chirp, then sample.
inline constexpr char kCubeMagic[4] = {'R', 'D', 'C', '1'};
inline constexpr std::size_t kCubeHeaderBytes = 4 + 3 * 4 + 6 * 8;

void write_cube(std::ostream& out, const DataCube& cube);
void write_cube_file(const std::string& path, const DataCube& cube);

/// Throws ParseError carrying the byte offset of the first bad field.
DataCube read_cube(std::istream& in);
DataCube read_cube_file(const std::string& path);

}  // namespace ctcfar
