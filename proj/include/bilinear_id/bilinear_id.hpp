#ifndef BILINEAR_ID_BILINEAR_ID_HPP
#define BILINEAR_ID_BILINEAR_ID_HPP

#include "bilinear_id/bmsb.hpp"
#include "bilinear_id/errors.hpp"
#include "bilinear_id/experiment.hpp"
#include "bilinear_id/identification.hpp"
#include "bilinear_id/io.hpp"
#include "bilinear_id/linalg.hpp"
#include "bilinear_id/model.hpp"
#include "bilinear_id/random.hpp"
#include "bilinear_id/report.hpp"
#include "bilinear_id/stability.hpp"

#endif  // BILINEAR_ID_BILINEAR_ID_HPP
