#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace sagda {

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NonFiniteError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Dense vector of doubles. Every public operation below leaves its result
/// finite or throws NonFiniteError.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  Vector(std::initializer_list<double> values) : data_(values) {}
  explicit Vector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  auto begin() noexcept { return data_.begin(); }
  auto end() noexcept { return data_.end(); }
  auto begin() const noexcept { return data_.begin(); }
  auto end() const noexcept { return data_.end(); }

  std::span<const double> view() const noexcept { return data_; }
  std::span<double> view() noexcept { return data_; }
  const std::vector<double>& values() const noexcept { return data_; }

  bool all_finite() const noexcept;

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> data_;
};

// Reductions accumulate in ascending index order.
double dot(const Vector& a, const Vector& b);
double norm2_sq(const Vector& a);

/// alpha * x + y.
Vector axpy(double alpha, const Vector& x, const Vector& y);

Vector add(const Vector& a, const Vector& b);
Vector sub(const Vector& a, const Vector& b);
Vector scale(double alpha, const Vector& a);

/// y += alpha * x in place.
void axpy_inplace(double alpha, const Vector& x, Vector& y);

/// Elementwise sum of the inputs in the given order, divided by their count.
Vector mean_of(std::span<const Vector> vectors);

/// Largest absolute entry; 0 for the empty vector.
double max_abs(const Vector& a);

void require_same_size(const Vector& a, const Vector& b, const char* what);
void require_finite(const Vector& a, const char* what);

std::string to_string(const Vector& v);

}  // namespace sagda
