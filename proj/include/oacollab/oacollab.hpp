#pragma once

#include "oacollab/config.hpp"
#include "oacollab/error.hpp"
#include "oacollab/fitting.hpp"
#include "oacollab/fitts.hpp"
#include "oacollab/geometry.hpp"
#include "oacollab/metrics.hpp"
#include "oacollab/nelder_mead.hpp"
#include "oacollab/oa_model.hpp"
#include "oacollab/plant.hpp"
#include "oacollab/robot_partner.hpp"
#include "oacollab/session_service.hpp"
#include "oacollab/sim_human.hpp"
#include "oacollab/task_engine.hpp"
#include "oacollab/trial.hpp"
#include "oacollab/trial_log.hpp"
#include "oacollab/vec2.hpp"
#include "oacollab/wire.hpp"
