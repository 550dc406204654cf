#pragma once

// Minimal SVG 1.1 writer for trajectory figures.

#include <span>
#include <string>
#include <vector>

#include "ccscp/scp.hpp"

namespace ccscp {

struct SvgStyle {
  std::string stroke = "black";
  std::string fill = "none";
  double stroke_width = 1.0;
  double opacity = 1.0;
  std::string dash;  // stroke-dasharray, empty for solid
};

/// Maps a world-coordinate box (meters, y up) onto a pixel canvas (y down).
class SvgWriter {
 public:
  SvgWriter(Vec2 world_min, Vec2 world_max, double pixels_per_meter, double padding_px = 40.0);

  void circle(Vec2 center, double radius, const SvgStyle& style);
  /// Semi-axes rx, ry rotated by `angle` radians counter-clockwise from +x.
  void ellipse(Vec2 center, double rx, double ry, double angle, const SvgStyle& style);
  void polyline(std::span<const Vec2> points, const SvgStyle& style);
  void text(Vec2 at, const std::string& content, double size_px, const std::string& color);
  /// Text anchored in pixel coordinates (legends, titles).
  void pixel_text(double x, double y, const std::string& content, double size_px,
                  const std::string& color);

  double width() const noexcept { return width_; }
  double height() const noexcept { return height_; }
  std::string str() const;

 private:
  double px(double x) const noexcept;
  double py(double y) const noexcept;

  Vec2 min_;
  Vec2 max_;
  double scale_;
  double pad_;
  double width_;
  double height_;
  std::vector<std::string> elements_;
};

struct SvgSeries {
  std::string label;
  Trajectory trajectory;
  std::string color;
};

/// Trajectories, start/goal markers, every step's obstacle disc and its
/// confidence ellipse with semi-axes sqrt(eigenvalue) * sqrt(2) * erf_inv(1 - 2 delta).
std::string render_trajectory_svg(const TrajectoryProblem& problem,
                                  std::span<const SvgSeries> series, const std::string& title);

}  // namespace ccscp
