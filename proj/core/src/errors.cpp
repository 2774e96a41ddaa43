#include "mdlm/errors.hpp"

#include <cstdio>
#include <mutex>
#include <utility>

namespace mdlm {

namespace {

std::mutex g_warn_mutex;

void default_warn(const std::string& msg) {
  std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

WarnHandler& handler_slot() {
  static WarnHandler handler = default_warn;
  return handler;
}

}  // namespace

WarnHandler set_warn_handler(WarnHandler handler) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  WarnHandler previous = handler_slot();
  handler_slot() = handler ? std::move(handler) : default_warn;
  return previous;
}

void warn(const std::string& msg) {
  std::lock_guard<std::mutex> lock(g_warn_mutex);
  handler_slot()(msg);
}

}  // namespace mdlm
