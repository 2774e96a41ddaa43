#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

namespace mdlm {

// SHA-1 of a byte buffer, lowercase hex.
std::string sha1_hex(const void* data, std::size_t len);

inline std::string sha1_hex(const std::string& s) {
  return sha1_hex(s.data(), s.size());
}

// Content hash of a file in git blob form: sha1("blob <size>\0" + bytes).
// Matches `git hash-object` so manifests can be cross-checked against a
// checkout.
std::string git_blob_hash(const std::string& path);

}  // namespace mdlm
