#pragma once

#include "cyma/error.hpp"
#include "cyma/exterior.hpp"
#include "cyma/field_io.hpp"
#include "cyma/frames.hpp"
#include "cyma/grid.hpp"
#include "cyma/krylov.hpp"
#include "cyma/macoeffs.hpp"
#include "cyma/reconstruct.hpp"
#include "cyma/serialize.hpp"
#include "cyma/solver.hpp"
