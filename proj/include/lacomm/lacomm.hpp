// Copyright 2026 The lacomm Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "lacomm/error.hpp"
#include "lacomm/dim.hpp"
#include "lacomm/scalar.hpp"
#include "lacomm/proto.hpp"
#include "lacomm/layout.hpp"
#include "lacomm/parse.hpp"
#include "lacomm/traverser.hpp"
#include "lacomm/bag.hpp"
#include "lacomm/plan.hpp"
#include "lacomm/compile.hpp"
#include "lacomm/sim_group.hpp"
#include "lacomm/mpi_traverser.hpp"
#include "lacomm/collectives.hpp"
