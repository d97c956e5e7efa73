#pragma once

#include "temsa/models/autodiff.hpp"
#include "temsa/models/bilstm.hpp"
#include "temsa/models/checkpoint.hpp"
#include "temsa/models/classifier.hpp"
#include "temsa/models/encoder.hpp"
#include "temsa/models/gradcheck.hpp"
#include "temsa/models/image_model.hpp"
#include "temsa/models/layers.hpp"
#include "temsa/models/train.hpp"
