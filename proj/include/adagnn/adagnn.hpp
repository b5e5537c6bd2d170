#pragma once

#include "adagnn/common.hpp"
#include "adagnn/sparse.hpp"
#include "adagnn/graph.hpp"
#include "adagnn/spectral.hpp"
#include "adagnn/model.hpp"
#include "adagnn/data.hpp"
#include "adagnn/optim.hpp"
#include "adagnn/checkpoint.hpp"
#include "adagnn/analysis.hpp"
