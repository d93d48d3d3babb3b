#pragma once

#include "cartier_lab/error.hpp"
#include "cartier_lab/field.hpp"
#include "cartier_lab/linalg.hpp"
#include "cartier_lab/semilinear.hpp"
#include "cartier_lab/polynomial.hpp"
#include "cartier_lab/groebner.hpp"
#include "cartier_lab/pid_module.hpp"
#include "cartier_lab/cartier_module.hpp"
#include "cartier_lab/gamma.hpp"
#include "cartier_lab/functors.hpp"
#include "cartier_lab/crystal.hpp"
#include "cartier_lab/serialize.hpp"
