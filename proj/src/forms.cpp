#include "hybrid/forms.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace hybrid {

namespace {

// Calls fn(chosen, rest, sign) for each (k, n-k) shuffle.
template <class Fn>
void for_each_shuffle(std::size_t n, std::size_t k, Fn&& fn) {
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    std::vector<std::size_t> rest;
    std::size_t j = 0;
    long inversions = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (j < k && idx[j] == i) {
        inversions += static_cast<long>(i - j);
        ++j;
      } else {
        rest.push_back(i);
      }
    }
    fn(idx, rest, inversions % 2 == 0 ? 1.0 : -1.0);
    // next combination
    std::size_t pos = k;
    while (pos > 0 && idx[pos - 1] == n - k + pos - 1) --pos;
    if (pos == 0) return;
    ++idx[pos - 1];
    for (std::size_t i = pos; i < k; ++i) idx[i] = idx[i - 1] + 1;
  }
}

Mat columns(const Mat& m, const std::vector<std::size_t>& cols) {
  Mat out(m.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(i) = m.col(cols[i]);
  return out;
}

}  // namespace

SampledKForm::SampledKForm(std::size_t degree, Eval eval)
    : degree_(degree), eval_(std::move(eval)) {}

double SampledKForm::operator()(const Vec& x, const Mat& vectors) const {
  if (static_cast<std::size_t>(vectors.cols()) != degree_)
    throw std::invalid_argument("form evaluated on the wrong number of vectors");
  return eval_(x, vectors);
}

SampledKForm SampledKForm::function(std::function<double(const Vec&)> f) {
  return SampledKForm(0, [f](const Vec& x, const Mat&) { return f(x); });
}

SampledKForm SampledKForm::one_form(std::function<Vec(const Vec&)> covector) {
  return SampledKForm(1, [covector](const Vec& x, const Mat& v) {
    return covector(x).dot(v.col(0));
  });
}

SampledKForm SampledKForm::two_form(std::function<Mat(const Vec&)> A) {
  return SampledKForm(2, [A](const Vec& x, const Mat& v) {
    return v.col(0).dot(A(x) * v.col(1));
  });
}

SampledKForm SampledKForm::volume(std::function<double(const Vec&)> density,
                                  std::size_t dim) {
  return SampledKForm(dim, [density](const Vec& x, const Mat& v) {
    return density(x) * v.determinant();
  });
}

SampledKForm SampledKForm::symplectic(std::size_t n) {
  return SampledKForm(2, [n](const Vec&, const Mat& v) {
    const auto n_ = static_cast<Eigen::Index>(n);
    const auto u = v.col(0), w = v.col(1);
    return u.head(n_).dot(w.tail(n_)) - u.tail(n_).dot(w.head(n_));
  });
}

SampledKForm wedge(const SampledKForm& a, const SampledKForm& b) {
  const std::size_t k = a.degree(), l = b.degree();
  return SampledKForm(k + l, [a, b, k, l](const Vec& x, const Mat& v) {
    double s = 0;
    for_each_shuffle(k + l, k, [&](const auto& chosen, const auto& rest, double sign) {
      s += sign * a(x, columns(v, chosen)) * b(x, columns(v, rest));
    });
    return s;
  });
}

SampledKForm interior(std::function<Vec(const Vec&)> field, const SampledKForm& a) {
  if (a.degree() == 0) throw std::invalid_argument("interior product of a 0-form");
  return SampledKForm(a.degree() - 1, [field, a](const Vec& x, const Mat& v) {
    Mat full(x.size(), v.cols() + 1);
    full.col(0) = field(x);
    full.rightCols(v.cols()) = v;
    return a(x, full);
  });
}

SampledKForm exterior_derivative(const SampledKForm& a, double step) {
  const std::size_t k = a.degree();
  return SampledKForm(k + 1, [a, k, step](const Vec& x, const Mat& v) {
    double s = 0;
    for (std::size_t i = 0; i <= k; ++i) {
      std::vector<std::size_t> others;
      for (std::size_t j = 0; j <= k; ++j)
        if (j != i) others.push_back(j);
      const Mat rest = columns(v, others);
      const Vec dir = v.col(i);
      const double dn = dir.norm();
      if (dn == 0) continue;
      const double h = step * std::max(1.0, x.lpNorm<Eigen::Infinity>()) / dn;
      auto cd = [&](double hh) {
        return (a(x + hh * dir, rest) - a(x - hh * dir, rest)) / (2 * hh);
      };
      const double d = (4 * cd(0.5 * h) - cd(h)) / 3;
      s += (i % 2 == 0 ? 1.0 : -1.0) * d;
    }
    return s;
  });
}

double antisymmetry_defect(const SampledKForm& a, const Vec& x, const Mat& vectors) {
  double worst = 0;
  for (Eigen::Index i = 0; i + 1 < vectors.cols(); ++i) {
    Mat swapped = vectors;
    swapped.col(i).swap(swapped.col(i + 1));
    worst = std::max(worst, std::abs(a(x, vectors) + a(x, swapped)));
  }
  return worst;
}

}  // namespace hybrid
