#pragma once

#include "hyperorbit/error.hpp"
#include "hyperorbit/matrix_core.hpp"
#include "hyperorbit/exp_log.hpp"
#include "hyperorbit/normal_form.hpp"
#include "hyperorbit/semigroup.hpp"
#include "hyperorbit/integer_relation.hpp"
#include "hyperorbit/coverage.hpp"
#include "hyperorbit/density.hpp"
#include "hyperorbit/pipeline.hpp"
#include "hyperorbit/constructor.hpp"
#include "hyperorbit/orbit.hpp"
#include "hyperorbit/json_io.hpp"
