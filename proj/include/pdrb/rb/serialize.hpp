#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "pdrb/mesh/mesh_io.hpp"
#include "pdrb/rb/model.hpp"

namespace pdrb::rb {

// Binary layout, all integers u64 little-endian, reals IEEE-754 binary64:
//   "PDRBMDL\0" version
//   problem (string)  generation  mesh text (string)
//   N  mus (2N reals)
//   A[q], B[q] (matrix)  F0, L[q], G0, K[q] (vector)
//   gap.grad[q], gap.flux[q], gap.cross (matrix)
//   U0, S00 (matrix)  u_g, sigma_fg (vector)
// string = length + bytes; vector = length + reals; matrix = rows + cols +
// reals in column-major order.

inline constexpr char model_magic[8] = {'P', 'D', 'R', 'B', 'M', 'D', 'L', '\0'};
inline constexpr std::uint64_t model_version = 1;

namespace detail {

static_assert(std::endian::native == std::endian::little, "model files assume a little-endian host");

class Writer {
 public:
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void vec(const Vector& v) {
    u64(static_cast<std::uint64_t>(v.size()));
    raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  void mat(const DenseMatrix& m) {
    u64(static_cast<std::uint64_t>(m.rows()));
    u64(static_cast<std::uint64_t>(m.cols()));
    raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
  void raw(const void* p, std::size_t n) {
    const auto* c = static_cast<const char*>(p);
    buf_.insert(buf_.end(), c, c + n);
  }
  std::vector<char> take() { return std::move(buf_); }

 private:
  std::vector<char> buf_;
};

class Reader {
 public:
  explicit Reader(const std::vector<char>& b) : b_(b) {}
  void raw(void* p, std::size_t n) {
    PDRB_THROW_IF(n > b_.size() - pos_, ErrorCode::parse_error,
                  "model: truncated stream at byte " + std::to_string(pos_));
    std::memcpy(p, b_.data() + pos_, n);
    pos_ += n;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  std::uint64_t count(std::uint64_t elem) {
    const std::uint64_t n = u64();
    PDRB_THROW_IF(elem > 0 && n > (b_.size() - pos_) / elem, ErrorCode::parse_error,
                  "model: truncated stream (length field " + std::to_string(n) + ")");
    return n;
  }
  std::string str() {
    std::string s(count(1), '\0');
    raw(s.data(), s.size());
    return s;
  }
  Vector vec() {
    Vector v(static_cast<Eigen::Index>(count(sizeof(double))));
    raw(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
    return v;
  }
  DenseMatrix mat() {
    const std::uint64_t r = u64();
    const std::uint64_t c = u64();
    PDRB_THROW_IF(c > 0 && r > (b_.size() - pos_) / sizeof(double) / c, ErrorCode::parse_error,
                  "model: truncated stream (matrix " + std::to_string(r) + "x" + std::to_string(c) + ")");
    DenseMatrix m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
    raw(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
    return m;
  }
  [[nodiscard]] bool done() const { return pos_ == b_.size(); }

 private:
  const std::vector<char>& b_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<char> serialize(const RBModel& m) {
  detail::Writer w;
  w.raw(model_magic, sizeof model_magic);
  w.u64(model_version);
  w.str(m.problem);
  w.u64(m.stamp.generation);
  w.str(m.mesh ? mesh::mesh_to_string(*m.mesh) : std::string());
  w.u64(m.N());
  for (const auto& p : m.mus) {
    w.f64(p[0]);
    w.f64(p[1]);
  }
  for (std::size_t q = 0; q < num_regions; ++q) w.mat(m.A[q]);
  for (std::size_t q = 0; q < num_regions; ++q) w.mat(m.B[q]);
  w.vec(m.F0);
  for (std::size_t q = 0; q < num_regions; ++q) w.vec(m.L[q]);
  w.vec(m.G0);
  for (std::size_t q = 0; q < num_regions; ++q) w.vec(m.K[q]);
  for (std::size_t q = 0; q < num_regions; ++q) w.mat(m.gap.grad[q]);
  for (std::size_t q = 0; q < num_regions; ++q) w.mat(m.gap.flux[q]);
  w.mat(m.gap.cross);
  w.mat(m.U0);
  w.mat(m.S00);
  w.vec(m.u_g);
  w.vec(m.sigma_fg);
  return w.take();
}

inline RBModel deserialize(const std::vector<char>& bytes) {
  detail::Reader r(bytes);
  char magic[8];
  r.raw(magic, sizeof magic);
  PDRB_THROW_IF(std::memcmp(magic, model_magic, sizeof magic) != 0, ErrorCode::parse_error, "model: bad magic");
  const std::uint64_t ver = r.u64();
  PDRB_THROW_IF(ver != model_version, ErrorCode::version_mismatch,
                "model: file version " + std::to_string(ver) + ", reader supports " + std::to_string(model_version));
  RBModel m;
  m.problem = r.str();
  const std::uint64_t gen = r.u64();
  const std::string mesh_text = r.str();
  m.mesh = std::make_shared<const mesh::Mesh>(mesh::mesh_from_string(mesh_text, gen));
  m.stamp = m.mesh->stamp();
  const std::uint64_t n = r.count(2 * sizeof(double));
  for (std::uint64_t i = 0; i < n; ++i) {
    const double a = r.f64();
    const double b = r.f64();
    m.mus.emplace_back(a, b);
  }
  for (std::size_t q = 0; q < num_regions; ++q) m.A[q] = r.mat();
  for (std::size_t q = 0; q < num_regions; ++q) m.B[q] = r.mat();
  m.F0 = r.vec();
  for (std::size_t q = 0; q < num_regions; ++q) m.L[q] = r.vec();
  m.G0 = r.vec();
  for (std::size_t q = 0; q < num_regions; ++q) m.K[q] = r.vec();
  for (std::size_t q = 0; q < num_regions; ++q) m.gap.grad[q] = r.mat();
  for (std::size_t q = 0; q < num_regions; ++q) m.gap.flux[q] = r.mat();
  m.gap.cross = r.mat();
  m.U0 = r.mat();
  m.S00 = r.mat();
  m.u_g = r.vec();
  m.sigma_fg = r.vec();
  PDRB_THROW_IF(!r.done(), ErrorCode::parse_error, "model: trailing bytes after the last field");

  const auto ni = static_cast<Eigen::Index>(n);
  bool ok = m.F0.size() == ni && m.G0.size() == ni && m.gap.cross.rows() == ni + 1 && m.gap.cross.cols() == ni + 1 &&
            m.U0.cols() == ni && m.S00.cols() == ni &&
            m.U0.rows() == static_cast<Eigen::Index>(m.mesh->num_vertices()) && m.u_g.size() == m.U0.rows() &&
            m.sigma_fg.size() == m.S00.rows();
  for (std::size_t q = 0; q < num_regions; ++q)
    ok = ok && m.A[q].rows() == ni && m.A[q].cols() == ni && m.B[q].rows() == ni && m.B[q].cols() == ni &&
         m.L[q].size() == ni && m.K[q].size() == ni && m.gap.grad[q].rows() == ni + 1 &&
         m.gap.flux[q].rows() == ni + 1;
  PDRB_THROW_IF(!ok, ErrorCode::parse_error, "model: inconsistent block sizes");
  return m;
}

inline void save_model(const std::string& path, const RBModel& m) {
  std::ofstream os(path, std::ios::binary);
  PDRB_THROW_IF(!os, ErrorCode::io_error, "cannot open '" + path + "' for writing");
  const auto b = serialize(m);
  os.write(b.data(), static_cast<std::streamsize>(b.size()));
  PDRB_THROW_IF(!os, ErrorCode::io_error, "write to '" + path + "' failed");
}

inline RBModel load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  PDRB_THROW_IF(!is, ErrorCode::io_error, "cannot open '" + path + "'");
  const std::vector<char> b((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return deserialize(b);
}

}  // namespace pdrb::rb
