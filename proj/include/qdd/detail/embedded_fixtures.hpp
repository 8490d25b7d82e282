// Copyright 2026 the qddkit authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

namespace qdd::detail {

// Contents of data/actuator_models.csv and data/sim_defaults.csv, baked in at
// build time so the library needs no runtime data files.
extern const char* const kModelTableCsv;
extern const char* const kSimDefaultsCsv;

}  // namespace qdd::detail
