#include "ctcfar/cube_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

#include "ctcfar/error.hpp"

namespace ctcfar {

namespace {

template <typename T>
void put_le(std::ostream& out, T value) {
  using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
  U bits = std::bit_cast<U>(value);
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) {
    bytes[i] = static_cast<char>((bits >> (8 * i)) & 0xffu);
  }
  out.write(bytes.data(), bytes.size());
}

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}

  template <typename T>
  T get(const char* field) {
    using U = std::conditional_t<sizeof(T) == 8, std::uint64_t, std::uint32_t>;
    std::array<unsigned char, sizeof(U)> bytes{};
    in_.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
    if (in_.gcount() != static_cast<std::streamsize>(bytes.size())) {
      throw ParseError(std::string("truncated RDC1 file while reading ") + field, offset_);
    }
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) bits |= U(bytes[i]) << (8 * i);
    offset_ += sizeof(U);
    return std::bit_cast<T>(bits);
  }

  void magic() {
    char buf[4] = {};
    in_.read(buf, 4);
    if (in_.gcount() != 4 || std::memcmp(buf, kCubeMagic, 4) != 0) {
      throw ParseError("bad magic, expected RDC1", 0);
    }
    offset_ = 4;
  }

  std::uint64_t offset() const { return offset_; }
  std::istream& stream() { return in_; }

 private:
  std::istream& in_;
  std::uint64_t offset_ = 0;
};

}  // namespace

void write_cube(std::ostream& out, const DataCube& cube) {
  const RadarParams& p = cube.params;
  out.write(kCubeMagic, 4);
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.samples));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.chirps));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(cube.channels.size()));
  for (double v : {p.f_c, p.slope, p.f_s, p.t_chirp, p.t_pri, p.element_spacing()}) {
    put_le<double>(out, v);
  }
  for (const auto& ch : cube.channels) {
    for (Eigen::Index m = 0; m < ch.cols(); ++m) {
      for (Eigen::Index n = 0; n < ch.rows(); ++n) {
        put_le<float>(out, static_cast<float>(ch(n, m).real()));
        put_le<float>(out, static_cast<float>(ch(n, m).imag()));
      }
    }
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing RDC1 stream");
}

void write_cube_file(const std::string& path, const DataCube& cube) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Io, "cannot open " + path + " for writing");
  write_cube(out, cube);
}

DataCube read_cube(std::istream& in) {
  Reader r(in);
  r.magic();
  const std::uint64_t dims_at = r.offset();
  const auto n = r.get<std::uint32_t>("N");
  const auto m = r.get<std::uint32_t>("M");
  const auto l = r.get<std::uint32_t>("L");
  if (n < 4 || m < 4 || l < 1 || n > (1u << 16) || m > (1u << 16) || l > 4096) {
    throw ParseError("implausible cube dimensions", dims_at);
  }

  RadarParams p;
  const std::uint64_t params_at = r.offset();
  p.samples = static_cast<int>(n);
  p.chirps = static_cast<int>(m);
  p.channels = static_cast<int>(l);
  p.f_c = r.get<double>("f_c");
  p.slope = r.get<double>("slope");
  p.f_s = r.get<double>("f_s");
  p.t_chirp = r.get<double>("T_c");
  p.t_pri = r.get<double>("T_PRI");
  p.spacing = r.get<double>("d");
  p.bandwidth = p.slope * p.t_chirp;
  p.lambda = kSpeedOfLight / p.f_c;
  try {
    p.validate();
  } catch (const Error& e) {
    throw ParseError(std::string("invalid radar parameters: ") + e.what(), params_at);
  }

  DataCube cube;
  cube.params = p;
  cube.channels.assign(l, Eigen::MatrixXcd(n, m));
  for (auto& ch : cube.channels) {
    for (Eigen::Index mi = 0; mi < ch.cols(); ++mi) {
      for (Eigen::Index ni = 0; ni < ch.rows(); ++ni) {
        const float re = r.get<float>("sample");
        const float im = r.get<float>("sample");
        ch(ni, mi) = Complex(re, im);
      }
    }
  }
  if (r.stream().peek() != std::char_traits<char>::eof()) {
    throw ParseError("trailing bytes after cube payload", r.offset());
  }
  return cube;
}

DataCube read_cube_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open " + path);
  return read_cube(in);
}

}  // namespace ctcfar
