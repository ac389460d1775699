#pragma once

/// @file boundary.hpp
/// @brief Polygonal wedge boundary y = g(x): vertices, face angles, turn
///        angles and outer normals. The flow domain is y < g(x), x >= 0.

#include <array>
#include <cmath>
#include <vector>

#include "wft/gasdyn.hpp"

namespace wft {

class WedgeBoundary {
 public:
  /// vertices (a_k, b_k), strictly increasing a, starting at (0, 0). The
  /// boundary continues past the last vertex with the final face angle.
  /// The first face must be horizontal (g'(0+) = 0).
  static WedgeBoundary from_vertices(std::vector<std::array<double, 2>> v) {
    if (v.size() < 2 || v[0][0] != 0.0 || v[0][1] != 0.0)
      throw regime_error("WedgeBoundary: vertices must start at (0, 0)");
    for (size_t k = 1; k < v.size(); ++k)
      if (!(v[k][0] > v[k - 1][0]))
        throw regime_error("WedgeBoundary: abscissas must increase strictly");
    WedgeBoundary b;
    b.vertices_ = std::move(v);
    const size_t n = b.vertices_.size();
    b.face_angles_.resize(n - 1);
    b.normals_.resize(n - 1);
    for (size_t k = 0; k + 1 < n; ++k) {
      const double dx = b.vertices_[k + 1][0] - b.vertices_[k][0];
      const double dy = b.vertices_[k + 1][1] - b.vertices_[k][1];
      b.face_angles_[k] = std::atan2(dy, dx);
      const double len = std::hypot(dx, dy);
      b.normals_[k] = {-dy / len, dx / len};
    }
    if (std::abs(b.face_angles_[0]) > 1e-14)
      throw regime_error("WedgeBoundary: first face must be horizontal (g'(0+) = 0)");
    b.turn_angles_.resize(n - 1, 0.0);
    for (size_t k = 1; k + 1 < n; ++k)
      b.turn_angles_[k] = b.face_angles_[k] - b.face_angles_[k - 1];
    return b;
  }

  size_t face_count() const { return face_angles_.size(); }
  size_t vertex_count() const { return vertices_.size(); }
  const std::vector<std::array<double, 2>>& vertices() const { return vertices_; }

  /// Angle omega_{k,k+1} of face k (the segment from vertex k to k+1; the
  /// last face extends to x = infinity).
  double face_angle(size_t k) const { return face_angles_[k]; }
  /// Turn angle omega_k at vertex k (zero at 0 and at the last vertex).
  double turn_angle(size_t k) const {
    return k < turn_angles_.size() ? turn_angles_[k] : 0.0;
  }
  /// Unit outer normal of face k, (-sin omega, cos omega).
  const std::array<double, 2>& normal(size_t k) const { return normals_[k]; }

  double vertex_x(size_t k) const { return vertices_[k][0]; }
  double vertex_y(size_t k) const { return vertices_[k][1]; }

  /// Total variation of g', the smallness parameter of the boundary.
  double turning_variation() const {
    double tv = 0.0;
    for (double w : turn_angles_) tv += std::abs(w);
    return tv;
  }

  /// Remaining wedge turning strictly past station x: sum_{a_k > x} |omega_k|.
  double remaining_turning(double x) const {
    double q = 0.0;
    for (size_t k = 1; k < turn_angles_.size(); ++k)
      if (vertices_[k][0] > x) q += std::abs(turn_angles_[k]);
    return q;
  }

  /// Index of the face containing station x.
  size_t face_index(double x) const {
    size_t k = 0;
    while (k + 1 < face_angles_.size() && x >= vertices_[k + 1][0]) ++k;
    return k;
  }

  double y_at(double x) const {
    const size_t k = face_index(x);
    return vertices_[k][1] + (x - vertices_[k][0]) * std::tan(face_angles_[k]);
  }

 private:
  std::vector<std::array<double, 2>> vertices_;
  std::vector<double> face_angles_;
  std::vector<double> turn_angles_;
  std::vector<std::array<double, 2>> normals_;
};

}  // namespace wft
