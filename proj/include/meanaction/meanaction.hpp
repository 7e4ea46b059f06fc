#pragma once

#include "action.hpp"
#include "annulus_map.hpp"
#include "bounds.hpp"
#include "contact.hpp"
#include "ech_lattice.hpp"
#include "errors.hpp"
#include "mapspec.hpp"
#include "orbit_search.hpp"
#include "parallel.hpp"
#include "profile.hpp"
#include "quadrature.hpp"
#include "rational.hpp"
#include "version.hpp"
