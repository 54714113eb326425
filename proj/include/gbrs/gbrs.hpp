#ifndef GBRS_GBRS_HPP
#define GBRS_GBRS_HPP

#include "gbrs/dataset.hpp"
#include "gbrs/granular_ball.hpp"
#include "gbrs/roughset.hpp"
#include "gbrs/gbrct.hpp"
#include "gbrs/eval.hpp"

#endif // GBRS_GBRS_HPP
