// Copyright 2026 The safebiop Authors
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


#ifndef SAFEBIOP_EXPCLI_PRESETS_HPP
#define SAFEBIOP_EXPCLI_PRESETS_HPP

#include <optional>
#include <string_view>
#include <vector>

namespace safebiop::expcli {

/// Config document compiled into the binary from presets/<name>.json.
struct Preset {
  std::string_view name;
  std::string_view json;
};

const std::vector<Preset>& embedded_presets();

std::optional<std::string_view> find_preset(std::string_view name);

}  // namespace safebiop::expcli

#endif  // SAFEBIOP_EXPCLI_PRESETS_HPP
