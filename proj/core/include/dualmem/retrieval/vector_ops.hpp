#pragma once

#include <span>

namespace dualmem {

// dot(a, b) / (|a| |b|), accumulated in double.
// Throws DimensionMismatch or ZeroVector.
double cosine(std::span<const float> a, std::span<const float> b);

double dot(std::span<const float> a, std::span<const float> b);

}  // namespace dualmem
