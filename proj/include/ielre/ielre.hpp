#pragma once

#include "ielre/types.hpp"
#include "ielre/signals.hpp"
#include "ielre/excitation.hpp"
#include "ielre/lti_plant.hpp"
#include "ielre/kre_drem.hpp"
#include "ielre/lre_generator.hpp"
#include "ielre/estimators.hpp"
#include "ielre/harness/integrator.hpp"
#include "ielre/harness/noise.hpp"
#include "ielre/harness/scenario.hpp"
#include "ielre/harness/simulate.hpp"
#include "ielre/harness/presets.hpp"
#include "ielre/harness/acceptance.hpp"
