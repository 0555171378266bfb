#pragma once

#include "thermoflow/core.hpp"
#include "thermoflow/flow.hpp"
#include "thermoflow/suspension.hpp"
#include "thermoflow/ode.hpp"
#include "thermoflow/transfer.hpp"
#include "thermoflow/segments.hpp"
#include "thermoflow/partition.hpp"
#include "thermoflow/decomposition.hpp"
#include "thermoflow/specification.hpp"
#include "thermoflow/regularity.hpp"
#include "thermoflow/equilibrium.hpp"
#include "thermoflow/io.hpp"
