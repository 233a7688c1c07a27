#pragma once

#include "czlab/core.hpp"
#include "czlab/weight_spec.hpp"
#include "czlab/funcspace.hpp"
#include "czlab/weights.hpp"
#include "czlab/kernels.hpp"
#include "czlab/operators.hpp"
#include "czlab/commutators.hpp"
#include "czlab/compactness.hpp"
