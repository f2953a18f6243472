#pragma once

// Everything in one include.

#include "dvlab/exact.hpp"
#include "dvlab/experiment.hpp"
#include "dvlab/lemmas.hpp"
#include "dvlab/linalg.hpp"
#include "dvlab/norm.hpp"
#include "dvlab/opnorm.hpp"
#include "dvlab/parallel.hpp"
#include "dvlab/params.hpp"
#include "dvlab/report.hpp"
#include "dvlab/rng.hpp"
#include "dvlab/subspace.hpp"
