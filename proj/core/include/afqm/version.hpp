#pragma once

namespace afqm {

inline constexpr int kVersionMajor = 0;
inline constexpr int kVersionMinor = 1;
inline constexpr int kVersionPatch = 0;
inline constexpr const char* kVersion = "0.1.0";

// Bumped whenever the on-disk policy/CSV layout changes.
inline constexpr const char* kPolicyFormat = "afqm-policy-v1";
inline constexpr const char* kManifestFormat = "afqm-manifest-v1";
inline constexpr const char* kCsvSchema = "v1";

}  // namespace afqm
