#pragma once

#include "controlburn/dataset.hpp"
#include "controlburn/error.hpp"
#include "controlburn/eval.hpp"
#include "controlburn/grow.hpp"
#include "controlburn/prune.hpp"
#include "controlburn/random.hpp"
#include "controlburn/select.hpp"
#include "controlburn/serialize.hpp"
#include "controlburn/synthetic.hpp"
#include "controlburn/tree.hpp"
