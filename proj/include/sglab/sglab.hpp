#ifndef SGLAB_SGLAB_HPP
#define SGLAB_SGLAB_HPP

#include "analysis.hpp"
#include "coefficients.hpp"
#include "config.hpp"
#include "experiment.hpp"
#include "field.hpp"
#include "geometry.hpp"
#include "grid.hpp"
#include "liouville.hpp"
#include "operators.hpp"
#include "pohozaev.hpp"
#include "quadrature.hpp"
#include "solver.hpp"
#include "version.hpp"

#endif
