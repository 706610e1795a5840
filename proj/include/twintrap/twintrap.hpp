// Copyright 2026 The twintrap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "twintrap/analytics.hpp"
#include "twintrap/config.hpp"
#include "twintrap/csv.hpp"
#include "twintrap/dynamics.hpp"
#include "twintrap/ensemble.hpp"
#include "twintrap/observables.hpp"
#include "twintrap/oracle.hpp"
#include "twintrap/presets.hpp"
#include "twintrap/pumping.hpp"
#include "twintrap/rng.hpp"
#include "twintrap/scenario.hpp"
#include "twintrap/twin_state.hpp"
