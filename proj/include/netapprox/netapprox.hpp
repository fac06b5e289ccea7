#pragma once

#include "netapprox/cluster_moment.hpp"
#include "netapprox/criteria.hpp"
#include "netapprox/effective.hpp"
#include "netapprox/energy.hpp"
#include "netapprox/error.hpp"
#include "netapprox/experiment.hpp"
#include "netapprox/geometry.hpp"
#include "netapprox/io.hpp"
#include "netapprox/keller.hpp"
#include "netapprox/models.hpp"
#include "netapprox/multigraph.hpp"
#include "netapprox/scan.hpp"
