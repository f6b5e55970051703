#pragma once

#include "chacha/bounds.hpp"
#include "chacha/config_oracle.hpp"
#include "chacha/engine.hpp"
#include "chacha/harness.hpp"
#include "chacha/hashing.hpp"
#include "chacha/ingest.hpp"
#include "chacha/learner.hpp"
#include "chacha/random.hpp"
#include "chacha/scheduler.hpp"
#include "chacha/synth.hpp"
