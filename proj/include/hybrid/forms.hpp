#pragma once

// Differential forms represented by their evaluation maps.

#include "hybrid/types.hpp"

#include <functional>

namespace hybrid {

class SampledKForm {
 public:
  // Columns of `vectors` are the k arguments.
  using Eval = std::function<double(const Vec& x, const Mat& vectors)>;

  SampledKForm(std::size_t degree, Eval eval);

  std::size_t degree() const { return degree_; }
  double operator()(const Vec& x, const Mat& vectors) const;
  double operator()(const Vec& x) const { return (*this)(x, Mat(x.size(), 0)); }

  static SampledKForm function(std::function<double(const Vec&)> f);
  static SampledKForm one_form(std::function<Vec(const Vec&)> covector);
  // alpha(u, v) = u^T A(x) v with A antisymmetric
  static SampledKForm two_form(std::function<Mat(const Vec&)> A);
  // f(x) dx^1 ^ ... ^ dx^N
  static SampledKForm volume(std::function<double(const Vec&)> density, std::size_t dim);
  // sum_i dq^i ^ dp_i on (q, p)
  static SampledKForm symplectic(std::size_t n);

 private:
  std::size_t degree_;
  Eval eval_;
};

SampledKForm wedge(const SampledKForm& a, const SampledKForm& b);

SampledKForm interior(std::function<Vec(const Vec&)> field, const SampledKForm& a);

/// dalpha(v_0..v_k) = sum_i (-1)^i D_{v_i} alpha(v_0..^v_i..v_k), central
/// differences with one Richardson level.
SampledKForm exterior_derivative(const SampledKForm& a, double step = 1e-4);

/// Largest |alpha(.., u, .., v, ..) + alpha(.., v, .., u, ..)| over adjacent swaps.
double antisymmetry_defect(const SampledKForm& a, const Vec& x, const Mat& vectors);

}  // namespace hybrid
