#include "blowup_lab/c_api.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

#include "blowup_lab/errors.hpp"
#include "commands.hpp"

struct blab_session {
  blab::Json defaults = blab::Json::object();
  std::string error;
};

namespace {

blab_status status_of(blab::ErrorKind k) {
  switch (k) {
    case blab::ErrorKind::parameter:
      return BLAB_ERR_PARAMETER;
    case blab::ErrorKind::unsupported:
      return BLAB_ERR_UNSUPPORTED;
    case blab::ErrorKind::io:
      return BLAB_ERR_IO;
    default:
      return BLAB_ERR_NUMERICAL;
  }
}

blab::Json parse_object(const char* text) {
  if (!text || !*text) return blab::Json::object();
  blab::Json j;
  try {
    j = blab::Json::parse(text);
  } catch (const std::exception& e) {
    throw blab::Error(blab::ErrorKind::parameter, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw blab::Error(blab::ErrorKind::parameter, "expected a JSON object");
  return j;
}

}  // namespace

extern "C" {

const char* blab_version(void) { return blab::version_string(); }

blab_status blab_session_create(const char* defaults_json, blab_session** out) {
  if (!out) return BLAB_ERR_PARAMETER;
  *out = nullptr;
  auto* s = new (std::nothrow) blab_session;
  if (!s) return BLAB_ERR_INTERNAL;
  try {
    s->defaults = parse_object(defaults_json);
  } catch (const blab::Error&) {
    delete s;
    return BLAB_ERR_PARAMETER;
  }
  *out = s;
  return BLAB_OK;
}

void blab_session_destroy(blab_session* s) { delete s; }

blab_status blab_run(blab_session* s, const char* command, const char* args_json, char** result_json) {
  if (!s) return BLAB_ERR_PARAMETER;
  s->error.clear();
  if (!command || !result_json) {
    s->error = "command and result pointer are required";
    return BLAB_ERR_PARAMETER;
  }
  *result_json = nullptr;
  try {
    blab::Json args = s->defaults;
    args.update(parse_object(args_json));
    std::string text = blab::run_command(command, args).dump(1);
    char* buf = static_cast<char*>(std::malloc(text.size() + 1));
    if (!buf) return BLAB_ERR_INTERNAL;
    std::memcpy(buf, text.c_str(), text.size() + 1);
    *result_json = buf;
    return BLAB_OK;
  } catch (const blab::Error& e) {
    s->error = e.what();
    return status_of(e.kind());
  } catch (const std::exception& e) {
    s->error = e.what();
    return BLAB_ERR_INTERNAL;
  }
}

const char* blab_last_error(const blab_session* s) { return s ? s->error.c_str() : ""; }

void blab_string_free(char* p) { std::free(p); }

}
