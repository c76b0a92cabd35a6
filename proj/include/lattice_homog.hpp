#pragma once

#include "lattice_homog/sequence.hpp"
#include "lattice_homog/rng.hpp"
#include "lattice_homog/lattice.hpp"
#include "lattice_homog/coefficients.hpp"
#include "lattice_homog/integrators.hpp"
#include "lattice_homog/profile.hpp"
#include "lattice_homog/homogenization.hpp"
#include "lattice_homog/quadrature.hpp"
#include "lattice_homog/analysis.hpp"
#include "lattice_homog/coarse_grain.hpp"
#include "lattice_homog/svg.hpp"
#include "lattice_homog/experiments.hpp"
#include "lattice_homog/verify.hpp"
