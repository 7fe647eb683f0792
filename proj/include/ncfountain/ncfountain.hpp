#pragma once

#include "ncfountain/bitvector.hpp"
#include "ncfountain/erasure_analysis.hpp"
#include "ncfountain/errors.hpp"
#include "ncfountain/experiment.hpp"
#include "ncfountain/gf2_fountain.hpp"
#include "ncfountain/protocol_sim.hpp"
#include "ncfountain/random.hpp"
#include "ncfountain/stats.hpp"
#include "ncfountain/wireless_channel.hpp"
