#pragma once

#include "aqmlab/config.hpp"
#include "aqmlab/dumbbell.hpp"
#include "aqmlab/errors.hpp"
#include "aqmlab/event_queue.hpp"
#include "aqmlab/metrics.hpp"
#include "aqmlab/msqm.hpp"
#include "aqmlab/packet.hpp"
#include "aqmlab/pi.hpp"
#include "aqmlab/queue_disc.hpp"
#include "aqmlab/red.hpp"
#include "aqmlab/rio.hpp"
#include "aqmlab/rng.hpp"
#include "aqmlab/sim_time.hpp"
#include "aqmlab/sweep.hpp"
#include "aqmlab/tcp.hpp"
#include "aqmlab/version.hpp"
#include "aqmlab/voip.hpp"
