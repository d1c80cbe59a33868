#pragma once

#include "mmspace/box.hpp"
#include "mmspace/cli.hpp"
#include "mmspace/errors.hpp"
#include "mmspace/io.hpp"
#include "mmspace/limits.hpp"
#include "mmspace/lipschitz.hpp"
#include "mmspace/matrix_distribution.hpp"
#include "mmspace/prokhorov.hpp"
#include "mmspace/random.hpp"
#include "mmspace/space.hpp"
#include "mmspace/suite.hpp"
