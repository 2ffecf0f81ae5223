#pragma once

#include "siframe/core.hpp"
#include "siframe/grid.hpp"
#include "siframe/sampled_field.hpp"
#include "siframe/mixed_norms.hpp"
#include "siframe/lattice_ops.hpp"
#include "siframe/fourier.hpp"
#include "siframe/fiberization.hpp"
#include "siframe/corpus.hpp"
#include "siframe/duality.hpp"
#include "siframe/discrete_oracle.hpp"
#include "siframe/io.hpp"
#include "siframe/report.hpp"
