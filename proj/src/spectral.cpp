#include "bsbm/spectral.hpp"

#include <numeric>

namespace bsbm {

CenteredMatrix::CenteredMatrix(const Biadjacency& base, double offset)
    : base_(&base), offset_(offset) {}

void CenteredMatrix::multiply(std::span<const double> x, std::span<double> y) const {
  const auto& a = *base_;
  if (x.size() != a.n2() || y.size() != a.n1()) {
    throw InvalidArgument("CenteredMatrix::multiply size mismatch");
  }
  const double correction =
      offset_ == 0.0 ? 0.0 : offset_ * std::accumulate(x.begin(), x.end(), 0.0);
  for (std::size_t i = 0; i < a.n1(); ++i) {
    double s = 0.0;
    for (auto j : a.row(i)) s += x[j];
    y[i] = s - correction;
  }
}

void CenteredMatrix::multiply_transpose(std::span<const double> v,
                                        std::span<double> z) const {
  const auto& a = *base_;
  if (v.size() != a.n1() || z.size() != a.n2()) {
    throw InvalidArgument("CenteredMatrix::multiply_transpose size mismatch");
  }
  const double correction =
      offset_ == 0.0 ? 0.0 : offset_ * std::accumulate(v.begin(), v.end(), 0.0);
  std::fill(z.begin(), z.end(), -correction);
  for (std::size_t i = 0; i < a.n1(); ++i) {
    const double vi = v[i];
    for (auto j : a.row(i)) z[j] += vi;
  }
}

std::vector<double> CenteredMatrix::row_sqnorms() const {
  const auto& a = *base_;
  const double n2 = static_cast<double>(a.n2());
  const double hit = (1.0 - offset_) * (1.0 - offset_);
  const double miss = offset_ * offset_;
  std::vector<double> d(a.n1());
  for (std::size_t i = 0; i < a.n1(); ++i) {
    const double deg = static_cast<double>(a.degree(i));
    d[i] = deg * hit + (n2 - deg) * miss;
  }
  return d;
}

GramOperator::GramOperator(CenteredMatrix m, std::vector<double> diag_correction)
    : m_(m), c_(std::move(diag_correction)), shift_(0.0) {
  if (c_.size() != m_.rows()) throw InvalidArgument("diagonal correction length mismatch");
  for (double c : c_) shift_ = std::max(shift_, c);
}

GramOperator GramOperator::hollowed(CenteredMatrix m) {
  auto d = m.row_sqnorms();
  return GramOperator(m, std::move(d));
}

GramOperator GramOperator::plain(CenteredMatrix m) {
  return GramOperator(m, std::vector<double>(m.rows(), 0.0));
}

void GramOperator::apply_shifted(std::span<const double> v, std::span<double> out,
                                 double s) const {
  if (v.size() != dim() || out.size() != dim()) {
    throw InvalidArgument("GramOperator::apply size mismatch");
  }
  std::vector<double> z(m_.cols());
  m_.multiply_transpose(v, z);
  m_.multiply(z, out);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += (s - c_[i]) * v[i];
}

DenseSymmetricOperator::DenseSymmetricOperator(std::size_t n, std::vector<double> row_major)
    : n_(n), m_(std::move(row_major)) {
  if (m_.size() != n * n) throw InvalidArgument("dense operator size mismatch");
}

void DenseSymmetricOperator::apply_shifted(std::span<const double> v, std::span<double> out,
                                           double s) const {
  if (v.size() != n_ || out.size() != n_) {
    throw InvalidArgument("DenseSymmetricOperator::apply size mismatch");
  }
  for (std::size_t i = 0; i < n_; ++i) {
    const double* row = m_.data() + i * n_;
    double acc = 0.0;
    for (std::size_t j = 0; j < n_; ++j) acc += row[j] * v[j];
    out[i] = acc + s * v[i];
  }
}

double DenseSymmetricOperator::psd_shift() const {
  double shift = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    double off = 0.0;
    for (std::size_t j = 0; j < n_; ++j) {
      if (j != i) off += std::abs(m_[i * n_ + j]);
    }
    shift = std::max(shift, off - m_[i * n_ + i]);
  }
  return shift;
}

}  // namespace bsbm
