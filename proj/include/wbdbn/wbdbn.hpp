#pragma once

#include "wbdbn/cpd.hpp"
#include "wbdbn/data.hpp"
#include "wbdbn/decision.hpp"
#include "wbdbn/error.hpp"
#include "wbdbn/factor.hpp"
#include "wbdbn/inference.hpp"
#include "wbdbn/io.hpp"
#include "wbdbn/learning.hpp"
#include "wbdbn/model.hpp"
#include "wbdbn/model_json.hpp"
#include "wbdbn/parallel.hpp"
#include "wbdbn/stats.hpp"
#include "wbdbn/synthetic.hpp"
#include "wbdbn/variable.hpp"
