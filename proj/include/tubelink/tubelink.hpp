#pragma once

#include "tubelink/config.hpp"
#include "tubelink/data_model.hpp"
#include "tubelink/errors.hpp"
#include "tubelink/evaluation.hpp"
#include "tubelink/fusion.hpp"
#include "tubelink/geometry.hpp"
#include "tubelink/io.hpp"
#include "tubelink/oracle.hpp"
#include "tubelink/parallel.hpp"
#include "tubelink/pathing.hpp"
#include "tubelink/pipeline.hpp"
#include "tubelink/random.hpp"
#include "tubelink/synth.hpp"
#include "tubelink/trimming.hpp"
