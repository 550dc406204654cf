#include "ccscp/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

namespace ccscp {
namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  // Avoid "-0.000" so output does not depend on the sign of tiny values.
  if (std::string_view(buf) == "-0.000") return "0.000";
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string style_attrs(const SvgStyle& s) {
  std::string a = " stroke=\"" + s.stroke + "\" fill=\"" + s.fill + "\" stroke-width=\"" +
                  fmt(s.stroke_width) + "\"";
  if (s.opacity != 1.0) a += " opacity=\"" + fmt(s.opacity) + "\"";
  if (!s.dash.empty()) a += " stroke-dasharray=\"" + s.dash + "\"";
  return a;
}

}  // namespace

SvgWriter::SvgWriter(Vec2 world_min, Vec2 world_max, double pixels_per_meter, double padding_px)
    : min_(world_min), max_(world_max), scale_(pixels_per_meter), pad_(padding_px) {
  width_ = (max_.x - min_.x) * scale_ + 2.0 * pad_;
  height_ = (max_.y - min_.y) * scale_ + 2.0 * pad_;
}

double SvgWriter::px(double x) const noexcept { return (x - min_.x) * scale_ + pad_; }
double SvgWriter::py(double y) const noexcept { return (max_.y - y) * scale_ + pad_; }

void SvgWriter::circle(Vec2 c, double r, const SvgStyle& style) {
  elements_.push_back("<circle cx=\"" + fmt(px(c.x)) + "\" cy=\"" + fmt(py(c.y)) + "\" r=\"" +
                      fmt(r * scale_) + "\"" + style_attrs(style) + "/>");
}

void SvgWriter::ellipse(Vec2 c, double rx, double ry, double angle, const SvgStyle& style) {
  // Pixel y points down, so a counter-clockwise world angle is clockwise here.
  const double deg = -angle * 180.0 / std::numbers::pi;
  elements_.push_back("<ellipse cx=\"" + fmt(px(c.x)) + "\" cy=\"" + fmt(py(c.y)) + "\" rx=\"" +
                      fmt(rx * scale_) + "\" ry=\"" + fmt(ry * scale_) + "\" transform=\"rotate(" +
                      fmt(deg) + " " + fmt(px(c.x)) + " " + fmt(py(c.y)) + ")\"" +
                      style_attrs(style) + "/>");
}

void SvgWriter::polyline(std::span<const Vec2> points, const SvgStyle& style) {
  std::string pts;
  for (const Vec2& p : points) {
    if (!pts.empty()) pts += ' ';
    pts += fmt(px(p.x)) + "," + fmt(py(p.y));
  }
  elements_.push_back("<polyline points=\"" + pts + "\"" + style_attrs(style) + "/>");
}

void SvgWriter::text(Vec2 at, const std::string& content, double size_px,
                     const std::string& color) {
  pixel_text(px(at.x), py(at.y), content, size_px, color);
}

void SvgWriter::pixel_text(double x, double y, const std::string& content, double size_px,
                           const std::string& color) {
  elements_.push_back("<text x=\"" + fmt(x) + "\" y=\"" + fmt(y) + "\" font-family=\"sans-serif\" font-size=\"" +
                      fmt(size_px) + "\" fill=\"" + color + "\">" + escape(content) + "</text>");
}

std::string SvgWriter::str() const {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + fmt(width_) +
         "\" height=\"" + fmt(height_) + "\" viewBox=\"0 0 " + fmt(width_) + " " + fmt(height_) +
         "\">\n";
  out += "<rect x=\"0\" y=\"0\" width=\"" + fmt(width_) + "\" height=\"" + fmt(height_) +
         "\" fill=\"white\"/>\n";
  for (const std::string& e : elements_) out += e + "\n";
  out += "</svg>\n";
  return out;
}

std::string render_trajectory_svg(const TrajectoryProblem& problem,
                                  std::span<const SvgSeries> series, const std::string& title) {
  const double k_sigma = std::numbers::sqrt2 * margin_coefficient(problem.delta);

  Vec2 lo = problem.start;
  Vec2 hi = problem.start;
  auto grow = [&](Vec2 p, double r) {
    lo = {std::min(lo.x, p.x - r), std::min(lo.y, p.y - r)};
    hi = {std::max(hi.x, p.x + r), std::max(hi.y, p.y + r)};
  };
  grow(problem.goal, 0.2);
  for (const SvgSeries& s : series) {
    for (const Vec2& p : s.trajectory.positions) grow(p, problem.robot_radius);
  }
  for (const auto& seq : problem.obstacles) {
    for (const GaussianDisc& d : seq) {
      grow(d.mean, std::max(d.radius, k_sigma * std::sqrt(d.cov.principal_axes().major)));
    }
  }
  lo = lo - Vec2{0.3, 0.3};
  hi = hi + Vec2{0.3, 0.3};

  SvgWriter svg(lo, hi, 100.0);
  for (const auto& seq : problem.obstacles) {
    for (const GaussianDisc& d : seq) {
      const PrincipalAxes axes = d.cov.principal_axes();
      svg.ellipse(d.mean, k_sigma * std::sqrt(axes.major), k_sigma * std::sqrt(axes.minor),
                  axes.angle, SvgStyle{"#d62728", "none", 0.6, 0.35, ""});
      svg.circle(d.mean, d.radius, SvgStyle{"#555555", "#bbbbbb", 0.8, 0.25, "4 2"});
    }
  }
  int legend = 0;
  for (const SvgSeries& s : series) {
    svg.polyline(s.trajectory.positions, SvgStyle{s.color, "none", 2.0, 1.0, ""});
    for (const Vec2& p : s.trajectory.positions) {
      svg.circle(p, 0.03, SvgStyle{s.color, s.color, 0.5, 1.0, ""});
    }
    svg.pixel_text(10.0, 20.0 + 16.0 * (legend + 1), s.label, 13.0, s.color);
    ++legend;
  }
  svg.circle(problem.start, 0.08, SvgStyle{"#2ca02c", "#2ca02c", 1.0, 1.0, ""});
  svg.text(problem.start + Vec2{0.1, -0.25}, "start", 12.0, "#2ca02c");
  svg.circle(problem.goal, 0.1, SvgStyle{"#ff7f0e", "none", 2.0, 1.0, ""});
  svg.circle(problem.goal, 0.03, SvgStyle{"#ff7f0e", "#ff7f0e", 1.0, 1.0, ""});
  svg.text(problem.goal + Vec2{0.1, -0.25}, "goal", 12.0, "#ff7f0e");
  svg.pixel_text(10.0, 18.0, title, 14.0, "black");
  return svg.str();
}

}  // namespace ccscp
