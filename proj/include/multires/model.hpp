#pragma once

#include "multires/model/config.hpp"
#include "multires/model/generate.hpp"
#include "multires/model/heads.hpp"
#include "multires/model/histograms.hpp"
#include "multires/model/likelihood.hpp"
#include "multires/model/model_io.hpp"
#include "multires/model/mrg.hpp"
#include "multires/model/train.hpp"
