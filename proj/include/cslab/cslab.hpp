#ifndef CSLAB_CSLAB_HPP
#define CSLAB_CSLAB_HPP

#include "cslab/builtin.hpp"
#include "cslab/certifier.hpp"
#include "cslab/concentration.hpp"
#include "cslab/ensemble.hpp"
#include "cslab/errors.hpp"
#include "cslab/harness.hpp"
#include "cslab/rng.hpp"
#include "cslab/serialize.hpp"
#include "cslab/solver.hpp"
#include "cslab/svg.hpp"

#endif
