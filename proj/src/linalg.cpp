#include "sagda/linalg.hpp"

#include <charconv>
#include <cmath>

namespace sagda {

bool Vector::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

void require_same_size(const Vector& a, const Vector& b, const char* what) {
  if (a.size() != b.size()) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" +
                         std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
  }
}

void require_finite(const Vector& a, const char* what) {
  if (!a.all_finite()) {
    throw NonFiniteError(std::string(what) + ": non-finite entry");
  }
}

double dot(const Vector& a, const Vector& b) {
  require_same_size(a, b, "dot");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

double norm2_sq(const Vector& a) {
  require_finite(a, "norm2_sq");
  // Same expression as dot(a, a) so the two agree bitwise.
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * a[i];
  return acc;
}

Vector axpy(double alpha, const Vector& x, const Vector& y) {
  require_same_size(x, y, "axpy");
  Vector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = alpha * x[i] + y[i];
  require_finite(out, "axpy");
  return out;
}

void axpy_inplace(double alpha, const Vector& x, Vector& y) {
  require_same_size(x, y, "axpy_inplace");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = alpha * x[i] + y[i];
  require_finite(y, "axpy_inplace");
}

Vector add(const Vector& a, const Vector& b) {
  require_same_size(a, b, "add");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] + b[i];
  require_finite(out, "add");
  return out;
}

Vector sub(const Vector& a, const Vector& b) {
  require_same_size(a, b, "sub");
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] - b[i];
  require_finite(out, "sub");
  return out;
}

Vector scale(double alpha, const Vector& a) {
  Vector out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = alpha * a[i];
  require_finite(out, "scale");
  return out;
}

Vector mean_of(std::span<const Vector> vectors) {
  if (vectors.empty()) throw DimensionError("mean_of: no vectors");
  Vector acc(vectors.front().size());
  for (const Vector& v : vectors) {
    require_same_size(acc, v, "mean_of");
    for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
  }
  const double count = static_cast<double>(vectors.size());
  for (double& v : acc) v /= count;
  require_finite(acc, "mean_of");
  return acc;
}

double max_abs(const Vector& a) {
  double m = 0.0;
  for (double v : a) m = std::fmax(m, std::fabs(v));
  return m;
}

std::string to_string(const Vector& v) {
  std::string out = "[";
  char buf[32];
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    auto res = std::to_chars(buf, buf + sizeof buf, v[i]);
    out.append(buf, res.ptr);
  }
  out += "]";
  return out;
}

}  // namespace sagda
