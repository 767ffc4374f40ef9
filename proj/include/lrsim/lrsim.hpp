// Copyright 2026 The lrsim Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef LRSIM_LRSIM_HPP
#define LRSIM_LRSIM_HPP

#include "lrsim/error.hpp"
#include "lrsim/fermion_jw.hpp"
#include "lrsim/lattice_graph.hpp"
#include "lrsim/liouvillian.hpp"
#include "lrsim/locality_lab.hpp"
#include "lrsim/operator_core.hpp"
#include "lrsim/propagation.hpp"

#endif  // LRSIM_LRSIM_HPP
