#pragma once

#include "padia/dense_eigen.hpp"
#include "padia/dynamics.hpp"
#include "padia/error.hpp"
#include "padia/experiments.hpp"
#include "padia/instance.hpp"
#include "padia/oracle.hpp"
#include "padia/spectrum.hpp"
