#pragma once

#include "gfmrelay/abc_oracle.hpp"
#include "gfmrelay/circuit.hpp"
#include "gfmrelay/clc.hpp"
#include "gfmrelay/config.hpp"
#include "gfmrelay/errors.hpp"
#include "gfmrelay/network.hpp"
#include "gfmrelay/phasor.hpp"
#include "gfmrelay/presets.hpp"
#include "gfmrelay/relay.hpp"
#include "gfmrelay/report.hpp"
#include "gfmrelay/scenario.hpp"
#include "gfmrelay/sources.hpp"
#include "gfmrelay/sweep.hpp"
