#include "dftrack/render.hpp"

#include <algorithm>
#include <cmath>

#include "dftrack/error.hpp"

namespace dft {

namespace {

void plot(GrayImage& img, long x, long y, float value) {
  if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return;
  img.at(static_cast<int>(x), static_cast<int>(y)) = value;
}

void draw_segment(GrayImage& img, const Eigen::Vector2d& a, const Eigen::Vector2d& b, float value,
                  double dash, double& arc) {
  const double len = (b - a).norm();
  const int steps = std::max(1, static_cast<int>(std::ceil(len / 0.25)));
  for (int i = 0; i <= steps; ++i) {
    const double t = static_cast<double>(i) / steps;
    const double s = arc + t * len;
    if (dash > 0.0 && static_cast<long>(std::floor(s / dash)) % 2 == 1) continue;
    const Eigen::Vector2d p = a + t * (b - a);
    plot(img, std::lround(p.x()), std::lround(p.y()), value);
  }
  arc += len;
}

}  // namespace

void draw_box_outline(GrayImage& img, const OrientedBox& box, float value, double dash) {
  const auto c = box.corners();
  double arc = 0.0;
  for (int i = 0; i < 4; ++i) draw_segment(img, c[i], c[(i + 1) % 4], value, dash, arc);
}

GrayImage render_overlay(const GrayImage& frame, const std::vector<OrientedBox>& truth,
                         const std::vector<OrientedBox>& pred) {
  GrayImage out = frame;
  for (const auto& b : truth) draw_box_outline(out, b, 1.0f);
  for (const auto& b : pred) draw_box_outline(out, b, 0.0f, 6.0);
  return out;
}

GrayImage render_chart(const std::vector<ChartSeries>& series, const ChartAxes& axes, int width,
                       int height) {
  if (width < 64 || height < 64) throw ContractError("chart raster too small");
  if (!(axes.x_max > axes.x_min) || !(axes.y_max > axes.y_min)) {
    throw ContractError("chart axis range is empty");
  }
  GrayImage img(width, height, 1.0f);
  const int left = 40;
  const int right = width - 16;
  const int top = 16;
  const int bottom = height - 32;
  auto to_px = [&](const ChartPoint& p) {
    const double u = (p.x - axes.x_min) / (axes.x_max - axes.x_min);
    const double v = (p.y - axes.y_min) / (axes.y_max - axes.y_min);
    return Eigen::Vector2d(left + u * (right - left), bottom - v * (bottom - top));
  };
  double arc = 0.0;
  draw_segment(img, {left, bottom}, {right, bottom}, 0.0f, 0.0, arc);
  draw_segment(img, {left, bottom}, {left, top}, 0.0f, 0.0, arc);
  for (int i = 0; i <= axes.x_ticks; ++i) {
    const double x = left + (right - left) * static_cast<double>(i) / std::max(1, axes.x_ticks);
    draw_segment(img, {x, bottom}, {x, bottom + 6.0}, 0.0f, 0.0, arc);
    draw_segment(img, {x, top}, {x, bottom}, 0.85f, 3.0, arc);
  }
  for (int i = 0; i <= axes.y_ticks; ++i) {
    const double y = bottom - (bottom - top) * static_cast<double>(i) / std::max(1, axes.y_ticks);
    draw_segment(img, {left - 6.0, y}, {left, y}, 0.0f, 0.0, arc);
    draw_segment(img, {left, y}, {right, y}, 0.85f, 3.0, arc);
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const float level = static_cast<float>(0.6 * static_cast<double>(s) /
                                           std::max<std::size_t>(1, series.size()));
    const auto& pts = series[s].points;
    if (series[s].connect) {
      for (std::size_t i = 1; i < pts.size(); ++i) {
        draw_segment(img, to_px(pts[i - 1]), to_px(pts[i]), level, 0.0, arc);
      }
    }
    for (const auto& p : pts) {
      const Eigen::Vector2d c = to_px(p);
      for (long dy = -3; dy <= 3; ++dy) {
        for (long dx = -3; dx <= 3; ++dx) {
          plot(img, std::lround(c.x()) + dx, std::lround(c.y()) + dy, level);
        }
      }
    }
  }
  return img;
}

}  // namespace dft
