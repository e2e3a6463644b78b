#pragma once

#include "dvdp/autonomous.hpp"
#include "dvdp/elliptic.hpp"
#include "dvdp/errors.hpp"
#include "dvdp/flow.hpp"
#include "dvdp/geometry.hpp"
#include "dvdp/io.hpp"
#include "dvdp/melnikov.hpp"
#include "dvdp/params.hpp"
#include "dvdp/resonance.hpp"
#include "dvdp/sweep.hpp"
