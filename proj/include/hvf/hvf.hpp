#pragma once

// Umbrella header.

#include "hvf/scalar.hpp"
#include "hvf/tensor.hpp"
#include "hvf/frame_geometry.hpp"
#include "hvf/field_analysis.hpp"
#include "hvf/classifier.hpp"
#include "hvf/harmonic_finder.hpp"
#include "hvf/chart_backend.hpp"
#include "hvf/catalog.hpp"
#include "hvf/report.hpp"
