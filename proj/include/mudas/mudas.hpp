#pragma once

// Umbrella header for the full library.

#include "mudas/adapt.hpp"
#include "mudas/augment.hpp"
#include "mudas/data.hpp"
#include "mudas/embed.hpp"
#include "mudas/errors.hpp"
#include "mudas/matrix.hpp"
#include "mudas/metrics.hpp"
#include "mudas/model_io.hpp"
#include "mudas/nn.hpp"
#include "mudas/rng.hpp"
#include "mudas/runconfig.hpp"
#include "mudas/select.hpp"
