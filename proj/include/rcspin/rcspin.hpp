#pragma once

/// Umbrella header: the whole library.

#include <rcspin/config.hpp>
#include <rcspin/constraints.hpp>
#include <rcspin/csv.hpp>
#include <rcspin/evolve.hpp>
#include <rcspin/hamiltonian.hpp>
#include <rcspin/lls.hpp>
#include <rcspin/manifest.hpp>
#include <rcspin/parallel.hpp>
#include <rcspin/rng.hpp>
#include <rcspin/sector.hpp>
#include <rcspin/spectral.hpp>
#include <rcspin/time_grid.hpp>
#include <rcspin/tli.hpp>
#include <rcspin/version.hpp>
