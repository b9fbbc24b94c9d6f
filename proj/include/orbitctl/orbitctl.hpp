#pragma once

#include "orbitctl/acceptance.hpp"
#include "orbitctl/config.hpp"
#include "orbitctl/counting.hpp"
#include "orbitctl/errors.hpp"
#include "orbitctl/hyperbolicity.hpp"
#include "orbitctl/map.hpp"
#include "orbitctl/orbit_enum.hpp"
#include "orbitctl/orbit_io.hpp"
#include "orbitctl/report.hpp"
#include "orbitctl/thermo.hpp"
#include "orbitctl/transfer_op.hpp"
