#pragma once

// Inspection rasters: box overlays on frames and small line/scatter charts.
// Truth outlines are solid white, predictions dashed black.

#include <string>
#include <vector>

#include "dftrack/image.hpp"
#include "dftrack/metrics.hpp"

namespace dft {

// Marks the pixels nearest to points spaced 0.25 px along the perimeter.
// With dash > 0 every other run of `dash` pixels of arc length is skipped.
void draw_box_outline(GrayImage& img, const OrientedBox& box, float value, double dash = 0.0);

GrayImage render_overlay(const GrayImage& frame, const std::vector<OrientedBox>& truth,
                         const std::vector<OrientedBox>& pred);

struct ChartPoint {
  double x = 0.0;
  double y = 0.0;
};

struct ChartSeries {
  std::vector<ChartPoint> points;
  bool connect = true;  // polyline through the points in order
};

struct ChartAxes {
  double x_min = 0.0;
  double x_max = 1.0;
  double y_min = 0.0;
  double y_max = 1.0;
  int x_ticks = 5;
  int y_ticks = 5;
};

// Axes with ticks, optional polylines, and a square marker per point. Each
// series gets its own gray level.
GrayImage render_chart(const std::vector<ChartSeries>& series, const ChartAxes& axes,
                       int width = 480, int height = 360);

}  // namespace dft
