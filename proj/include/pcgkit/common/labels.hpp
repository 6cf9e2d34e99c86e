// Copyright 2026 The pcgkit Authors
// SPDX-License-Identifier: Apache-2.0
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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace pcg {

// Murmur task (2022 CirCor data) uses Present/Unknown/Absent; the abnormal
// PCG task (2016 data) uses Normal/Abnormal.
enum class ClassLabel { Present, Unknown, Absent, Normal, Abnormal };

enum class Task { Murmur2022, Abnormal2016 };

enum class Location { AV, PV, TV, MV, Phc, Single };

std::string_view to_string(ClassLabel label);
std::string_view to_string(Task task);
std::string_view to_string(Location loc);

// Case-insensitive. Returns nullopt for unrecognized names.
std::optional<ClassLabel> parse_label(std::string_view s);
std::optional<Task> parse_task(std::string_view s);
std::optional<Location> parse_location(std::string_view s);

bool label_belongs_to(ClassLabel label, Task task);

// Class ordering used for confusion matrices and network outputs.
// Murmur: Present, Unknown, Absent (expert-row order of the weighted
// accuracy matrix). Abnormal: Abnormal, Normal.
std::vector<ClassLabel> task_classes(Task task);

// Higher value wins a voting tie.
int severity(ClassLabel label);

}  // namespace pcg
