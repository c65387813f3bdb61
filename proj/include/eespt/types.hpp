#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eespt {

using Vec3 = std::array<double, 3>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline Vec3& operator+=(Vec3& a, const Vec3& b) { a[0] += b[0]; a[1] += b[1]; a[2] += b[2]; return a; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

// Base of the error hierarchy; the CLI maps subclasses to distinct exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error { public: using Error::Error; };
class UnsupportedElementError : public Error { public: using Error::Error; };
class DegenerateElementError : public Error { public: using Error::Error; };
class NonManifoldError : public Error { public: using Error::Error; };
class NotSpdError : public Error { public: using Error::Error; };
class InfeasibleConstraintsError : public Error { public: using Error::Error; };
class RankDeficiencyError : public Error { public: using Error::Error; };
class RigidModeError : public Error { public: using Error::Error; };
class IncompatibleDataError : public Error { public: using Error::Error; };
class NestingError : public Error { public: using Error::Error; };
class InconsistencyError : public Error { public: using Error::Error; };
class UnsupportedDegreeError : public Error { public: using Error::Error; };
class MissingDataError : public Error { public: using Error::Error; };
class DegenerateRatioError : public Error { public: using Error::Error; };
class DivisionByZeroError : public Error { public: using Error::Error; };
class UndefinedEffectivityError : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

}  // namespace eespt
