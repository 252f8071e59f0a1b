/*
 * Copyright 2026 The gpbound Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#ifndef GPBOUND_GPBOUND_HPP
#define GPBOUND_GPBOUND_HPP

#include "gpbound/bound_engine.hpp"
#include "gpbound/box_optimizer.hpp"
#include "gpbound/common.hpp"
#include "gpbound/gp_core.hpp"
#include "gpbound/gpssm_sim.hpp"
#include "gpbound/hyperparameter_fit.hpp"
#include "gpbound/io.hpp"
#include "gpbound/kernel_checks.hpp"
#include "gpbound/kernels.hpp"
#include "gpbound/oracle.hpp"

#endif  // GPBOUND_GPBOUND_HPP
