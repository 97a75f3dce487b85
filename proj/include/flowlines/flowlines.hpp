#pragma once

#include "flowlines/acoustics.hpp"
#include "flowlines/electromagnetics.hpp"
#include "flowlines/flux_field.hpp"
#include "flowlines/oracles.hpp"
#include "flowlines/output.hpp"
#include "flowlines/quadrature.hpp"
#include "flowlines/quantum.hpp"
#include "flowlines/scenario.hpp"
#include "flowlines/tracer.hpp"
#include "flowlines/types.hpp"
#include "flowlines/wavefield.hpp"
