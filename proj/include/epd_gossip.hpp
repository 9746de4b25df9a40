#pragma once

// Umbrella header.

#include "epd_gossip/error.hpp"
#include "epd_gossip/quadrature.hpp"
#include "epd_gossip/specfun.hpp"
#include "epd_gossip/lattice.hpp"
#include "epd_gossip/schedules.hpp"
#include "epd_gossip/gossip.hpp"
#include "epd_gossip/pde_oracles.hpp"
#include "epd_gossip/spectral.hpp"
#include "epd_gossip/io.hpp"
#include "epd_gossip/acceptance.hpp"
#include "epd_gossip/experiments.hpp"
