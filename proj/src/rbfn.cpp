#include "rbfn.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "crc32.hpp"
#include "error.hpp"

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; big-endian hosts unsupported");

namespace dlo {

namespace {

constexpr char kMagic[8] = {'D', 'L', 'O', 'R', 'B', 'F', '1', '\0'};

void append(std::string& buf, const void* p, size_t len) {
  buf.append(static_cast<const char*>(p), len);
}

void append_u32(std::string& buf, uint32_t v) { append(buf, &v, 4); }

}  // namespace

RbfNetwork::RbfNetwork(int q, int l, int n, int m) : q_(q), l_(l), n_(n), m_(m) {
  if (q < 1 || l < 1 || n < 1 || m < 1)
    raise(ErrorCode::InvalidArgument, "network dimensions must be positive");
  centers_ = Eigen::MatrixXd::Zero(input_dim(), q);
  sigma_ = Eigen::VectorXd::Ones(q);
  W_ = Eigen::MatrixXd::Zero(rows(), q);
}

Eigen::VectorXd RbfNetwork::activations(const Eigen::VectorXd& phi) const {
  if (phi.size() != input_dim())
    raise(ErrorCode::DimensionMismatch, "phi has wrong dimension");
  Eigen::VectorXd theta(q_);
  for (int i = 0; i < q_; ++i) {
    double d2 = (phi - centers_.col(i)).squaredNorm();
    theta[i] = std::exp(-d2 / (sigma_[i] * sigma_[i]));
  }
  return theta;
}

Eigen::MatrixXd RbfNetwork::estimate_jacobian(const Eigen::VectorXd& phi,
                                              int block) const {
  if (block < 0 || block > m_)
    raise(ErrorCode::InvalidArgument, "block index out of range");
  Eigen::VectorXd g = W_.middleRows(block * block_rows(), block_rows()) *
                      activations(phi);
  return Eigen::Map<const Eigen::MatrixXd>(g.data(), l_, n_);
}

Eigen::MatrixXd RbfNetwork::stacked_jacobian(const Eigen::VectorXd& phi,
                                             const std::vector<int>& blocks) const {
  if (blocks.empty()) raise(ErrorCode::InvalidArgument, "no blocks given");
  Eigen::VectorXd theta = activations(phi);
  Eigen::MatrixXd J(l_ * blocks.size(), n_);
  for (size_t k = 0; k < blocks.size(); ++k) {
    if (blocks[k] < 0 || blocks[k] > m_)
      raise(ErrorCode::InvalidArgument, "block index out of range");
    Eigen::VectorXd g =
        W_.middleRows(blocks[k] * block_rows(), block_rows()) * theta;
    J.middleRows(k * l_, l_) =
        Eigen::Map<const Eigen::MatrixXd>(g.data(), l_, n_);
  }
  return J;
}

Eigen::MatrixXd RbfNetwork::full_jacobian(const Eigen::VectorXd& phi) const {
  Eigen::VectorXd theta = activations(phi);
  Eigen::VectorXd g = W_.topRows(m_ * block_rows()) * theta;
  Eigen::MatrixXd J(l_ * m_, n_);
  for (int k = 0; k < m_; ++k)
    J.middleRows(k * l_, l_) = Eigen::Map<const Eigen::MatrixXd>(
        g.data() + k * block_rows(), l_, n_);
  return J;
}

Eigen::VectorXd RbfNetwork::predict_velocities(const Eigen::VectorXd& phi,
                                               const Eigen::VectorXd& rdot) const {
  if (rdot.size() != n_)
    raise(ErrorCode::DimensionMismatch, "rdot has wrong dimension");
  return full_jacobian(phi) * rdot;
}

void RbfNetwork::save(const std::string& path) const {
  std::string buf;
  buf.reserve(16 + 8 * (size_t(q_) + centers_.size() + W_.size()) + 4);
  append(buf, kMagic, 8);
  append_u32(buf, uint32_t(q_));
  append_u32(buf, uint32_t(l_));
  append_u32(buf, uint32_t(n_));
  append_u32(buf, uint32_t(m_));
  append(buf, sigma_.data(), 8 * size_t(q_));
  // Centers per unit: center i occupies input_dim consecutive doubles.
  for (int i = 0; i < q_; ++i)
    append(buf, centers_.col(i).data(), 8 * size_t(input_dim()));
  // Weights row-major.
  for (int r = 0; r < rows(); ++r) {
    Eigen::VectorXd row = W_.row(r);
    append(buf, row.data(), 8 * size_t(q_));
  }
  append_u32(buf, crc32(buf.data(), buf.size()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(ErrorCode::Io, "cannot open for writing: " + path);
  out.write(buf.data(), std::streamsize(buf.size()));
  if (!out) raise(ErrorCode::Io, "write failed: " + path);
}

RbfNetwork RbfNetwork::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorCode::Io, "cannot open: " + path);
  std::string buf((std::istreambuf_iterator<char>(in)),
                  std::istreambuf_iterator<char>());
  if (in.bad()) raise(ErrorCode::Io, "read failed: " + path);

  if (buf.size() < 24 + 4) raise(ErrorCode::Io, "file too short: " + path);
  if (std::memcmp(buf.data(), kMagic, 8) != 0)
    raise(ErrorCode::VersionMismatch,
          "not a DLORBF1 model (bad magic): " + path);

  uint32_t dims[4];
  std::memcpy(dims, buf.data() + 8, 16);
  const uint32_t q = dims[0], l = dims[1], n = dims[2], m = dims[3];
  if (q < 1 || l < 1 || n < 1 || m < 1 || q > (1u << 24) || l > 1024 ||
      n > 1024 || m > 4096)
    raise(ErrorCode::DimensionMismatch, "implausible header dimensions");

  const size_t lm = size_t(l) * m;
  const size_t wrows = size_t(m + 1) * l * n;
  const size_t expect = 24 + 8 * (q + q * lm + wrows * q) + 4;
  if (buf.size() != expect)
    raise(ErrorCode::DimensionMismatch,
          "file size does not match header dimensions");

  uint32_t stored;
  std::memcpy(&stored, buf.data() + buf.size() - 4, 4);
  if (stored != crc32(buf.data(), buf.size() - 4))
    raise(ErrorCode::CorruptPayload, "checksum mismatch: " + path);

  RbfNetwork net{int(q), int(l), int(n), int(m)};
  const char* p = buf.data() + 24;
  std::memcpy(net.sigma_.data(), p, 8 * q);
  p += 8 * q;
  for (uint32_t i = 0; i < q; ++i) {
    std::memcpy(net.centers_.col(i).data(), p, 8 * lm);
    p += 8 * lm;
  }
  for (size_t r = 0; r < wrows; ++r) {
    Eigen::VectorXd row(q);
    std::memcpy(row.data(), p, 8 * q);
    net.W_.row(r) = row;
    p += 8 * q;
  }
  return net;
}

}  // namespace dlo
