#pragma once

#include "bootstrap.hpp"
#include "data.hpp"
#include "error.hpp"
#include "glm.hpp"
#include "io.hpp"
#include "loss.hpp"
#include "metrics.hpp"
#include "random.hpp"
#include "simgen.hpp"
#include "similarity.hpp"
#include "study.hpp"
#include "svg.hpp"
#include "tuner.hpp"
