#pragma once

#include "kbraess/braess.hpp"
#include "kbraess/circuit.hpp"
#include "kbraess/dcopf.hpp"
#include "kbraess/error.hpp"
#include "kbraess/io.hpp"
#include "kbraess/solver.hpp"
#include "kbraess/transport.hpp"
#include "kbraess/verification.hpp"
