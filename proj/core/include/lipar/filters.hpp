#pragma once

#include <vector>

#include "lipar/tensor.hpp"

namespace lipar {

/// Normalized 1-D Gaussian taps, `extent` odd, centred.
std::vector<double> gaussian_taps(int extent, double sigma);

/// Separable Gaussian over (t, y, x) with zero padding outside the field.
DeltaField gaussian_blur3d(const DeltaField& field, int extent, double sigma);

/// Boolean median over an extent^3 cube (majority vote), replicate padding.
BoolField median3d(const BoolField& mask, int extent);

/// Per-frame square structuring element, replicate padding.
BoolField dilate2d(const BoolField& mask, int extent);
BoolField erode2d(const BoolField& mask, int extent);
/// Dilation followed by erosion, frame by frame.
BoolField close2d(const BoolField& mask, int extent);

/// extent^3 box dilation applied `iterations` times, replicate padding.
BoolField dilate3d(const BoolField& mask, int extent, int iterations);

}  // namespace lipar
