/*
 * Copyright 2026 The vflp Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Umbrella header.

#ifndef VFLP_VFLP_HPP_
#define VFLP_VFLP_HPP_

#include "vflp/attacks.hpp"
#include "vflp/blackbox.hpp"
#include "vflp/dataset.hpp"
#include "vflp/defense.hpp"
#include "vflp/error.hpp"
#include "vflp/experiments.hpp"
#include "vflp/metrics.hpp"
#include "vflp/model.hpp"
#include "vflp/numerics.hpp"
#include "vflp/system.hpp"

#endif  // VFLP_VFLP_HPP_
