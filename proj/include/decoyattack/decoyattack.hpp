// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "decoyattack/analysis.hpp"
#include "decoyattack/attack_opt.hpp"
#include "decoyattack/channel_decoy.hpp"
#include "decoyattack/coherent_source.hpp"
#include "decoyattack/config.hpp"
#include "decoyattack/mc_sim.hpp"
#include "decoyattack/report.hpp"
#include "decoyattack/simplex.hpp"
