// src/enhancement/annotation.cc

// Copyright 2026  farfield-kit authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include "farfield/enhancement/annotation.h"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "farfield/base/error.h"
#include "json.hpp"

namespace farfield {

ActivityAnnotation::ActivityAnnotation(std::vector<ActivitySegment> segments)
    : segments_(std::move(segments)) {
  for (const auto &s : segments_) {
    if (s.speaker.empty())
      throw Error(ErrorCode::kInvalidConfig, "empty speaker id in annotation");
    if (!(s.start_s >= 0.0 && s.start_s < s.end_s))
      throw Error(ErrorCode::kInvalidConfig,
                  "bad segment for '" + s.speaker + "': need 0 <= start < end");
  }
}

std::vector<std::string> ActivityAnnotation::Speakers() const {
  std::set<std::string> ids;
  for (const auto &s : segments_) ids.insert(s.speaker);
  return {ids.begin(), ids.end()};
}

bool ActivityAnnotation::HasSpeaker(const std::string &speaker) const {
  return std::any_of(segments_.begin(), segments_.end(),
                     [&](const auto &s) { return s.speaker == speaker; });
}

bool ActivityAnnotation::IsActive(const std::string &speaker, double time_s,
                                  double context_s) const {
  for (const auto &s : segments_)
    if (s.speaker == speaker && time_s >= s.start_s - context_s &&
        time_s < s.end_s + context_s)
      return true;
  return false;
}

ActivityAnnotation ActivityAnnotation::FromJson(const std::string &text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception &e) {
    throw Error(ErrorCode::kFormatError,
                std::string("annotation is not valid JSON: ") + e.what());
  }
  if (!doc.is_array())
    throw Error(ErrorCode::kFormatError, "annotation must be a JSON array");
  std::vector<ActivitySegment> segs;
  for (const auto &item : doc) {
    if (!item.is_object() || !item.contains("speaker") ||
        !item.contains("start") || !item.contains("end") ||
        !item["speaker"].is_string() || !item["start"].is_number() ||
        !item["end"].is_number())
      throw Error(ErrorCode::kFormatError,
                  "annotation entries need string 'speaker' and numeric "
                  "'start'/'end'");
    segs.push_back({item["speaker"].get<std::string>(),
                    item["start"].get<double>(), item["end"].get<double>()});
  }
  return ActivityAnnotation(std::move(segs));
}

ActivityAnnotation ActivityAnnotation::Load(const std::string &path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return FromJson(ss.str());
}

std::string ActivityAnnotation::ToJson() const {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto &s : segments_)
    doc.push_back({{"speaker", s.speaker}, {"start", s.start_s},
                   {"end", s.end_s}});
  return doc.dump();
}

}  // namespace farfield
