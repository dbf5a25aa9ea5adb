#pragma once

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace prototrack {

// LaSOT-style 14-attribute challenge taxonomy.
enum class Attribute {
  CM,   // camera motion
  VC,   // view change
  ROT,  // rotation
  SV,   // scale variation
  DEF,  // deformation
  BC,   // background clutter / nearby distractors
  POC,  // partial occlusion
  FOC,  // full occlusion
  MB,   // motion blur
  IV,   // illumination variation
  ARC,  // aspect ratio change
  OV,   // out of view
  LR,   // low resolution
  FM,   // fast motion
};

using AttributeSet = std::set<Attribute>;

const char* to_abbrev(Attribute a);
std::optional<Attribute> attribute_from_abbrev(const std::string& abbrev);
const std::vector<Attribute>& all_attributes();

}  // namespace prototrack
