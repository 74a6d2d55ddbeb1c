// include/farfield/enhancement/annotation.h

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

#ifndef FARFIELD_ENHANCEMENT_ANNOTATION_H_
#define FARFIELD_ENHANCEMENT_ANNOTATION_H_

#include <string>
#include <vector>

namespace farfield {

struct ActivitySegment {
  std::string speaker;
  double start_s = 0.0;
  double end_s = 0.0;
};

// Speaker activity intervals. Segment order is irrelevant: speakers are
// always reported in sorted order.
class ActivityAnnotation {
 public:
  ActivityAnnotation() = default;
  // Throws InvalidConfig on an empty speaker id, negative start or
  // start >= end.
  explicit ActivityAnnotation(std::vector<ActivitySegment> segments);

  const std::vector<ActivitySegment> &segments() const { return segments_; }
  std::vector<std::string> Speakers() const;
  bool HasSpeaker(const std::string &speaker) const;

  // True when `time_s` lies in [start - context, end + context) of any of the
  // speaker's segments.
  bool IsActive(const std::string &speaker, double time_s,
                double context_s = 0.0) const;

  // JSON array of {"speaker", "start", "end"} objects.
  static ActivityAnnotation FromJson(const std::string &text);
  static ActivityAnnotation Load(const std::string &path);
  std::string ToJson() const;

 private:
  std::vector<ActivitySegment> segments_;
};

}  // namespace farfield

#endif  // FARFIELD_ENHANCEMENT_ANNOTATION_H_
