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

#include "pcgkit/common/labels.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <utility>

namespace pcg {

namespace {

bool iequals(std::string_view a, std::string_view b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(), [](char x, char y) {
           return std::tolower(static_cast<unsigned char>(x)) ==
                  std::tolower(static_cast<unsigned char>(y));
         });
}

constexpr std::array<std::pair<ClassLabel, std::string_view>, 5> kLabels{{
    {ClassLabel::Present, "Present"},
    {ClassLabel::Unknown, "Unknown"},
    {ClassLabel::Absent, "Absent"},
    {ClassLabel::Normal, "Normal"},
    {ClassLabel::Abnormal, "Abnormal"},
}};

constexpr std::array<std::pair<Location, std::string_view>, 6> kLocations{{
    {Location::AV, "AV"},
    {Location::PV, "PV"},
    {Location::TV, "TV"},
    {Location::MV, "MV"},
    {Location::Phc, "Phc"},
    {Location::Single, "Single"},
}};

}  // namespace

std::string_view to_string(ClassLabel label) {
  for (const auto& [l, name] : kLabels)
    if (l == label) return name;
  return "?";
}

std::string_view to_string(Task task) {
  return task == Task::Murmur2022 ? "pcg2022" : "pcg2016";
}

std::string_view to_string(Location loc) {
  for (const auto& [l, name] : kLocations)
    if (l == loc) return name;
  return "?";
}

std::optional<ClassLabel> parse_label(std::string_view s) {
  for (const auto& [l, name] : kLabels)
    if (iequals(s, name)) return l;
  return std::nullopt;
}

std::optional<Task> parse_task(std::string_view s) {
  if (iequals(s, "pcg2022") || iequals(s, "murmur")) return Task::Murmur2022;
  if (iequals(s, "pcg2016") || iequals(s, "abnormal")) return Task::Abnormal2016;
  return std::nullopt;
}

std::optional<Location> parse_location(std::string_view s) {
  for (const auto& [l, name] : kLocations)
    if (iequals(s, name)) return l;
  return std::nullopt;
}

bool label_belongs_to(ClassLabel label, Task task) {
  switch (label) {
    case ClassLabel::Present:
    case ClassLabel::Unknown:
    case ClassLabel::Absent:
      return task == Task::Murmur2022;
    case ClassLabel::Normal:
    case ClassLabel::Abnormal:
      return task == Task::Abnormal2016;
  }
  return false;
}

std::vector<ClassLabel> task_classes(Task task) {
  if (task == Task::Murmur2022)
    return {ClassLabel::Present, ClassLabel::Unknown, ClassLabel::Absent};
  return {ClassLabel::Abnormal, ClassLabel::Normal};
}

int severity(ClassLabel label) {
  switch (label) {
    case ClassLabel::Present: return 3;
    case ClassLabel::Unknown: return 2;
    case ClassLabel::Absent: return 1;
    case ClassLabel::Abnormal: return 2;
    case ClassLabel::Normal: return 1;
  }
  return 0;
}

}  // namespace pcg
