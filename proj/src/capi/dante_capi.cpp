#include "dante/dante.h"

#include <cstring>
#include <sstream>
#include <string>

#include "dante/acceptance.hpp"
#include "dante/errors.hpp"
#include "dante/experiment.hpp"

struct dante_config {
  dante::RunConfig config;
};

struct dante_run {
  dante::ExperimentResult result;
};

namespace {

thread_local std::string last_error;

dante_status fail(dante_status status, const std::string& message) {
  last_error = message;
  return status;
}

// Maps the core exception hierarchy onto status codes.
template <typename Fn>
dante_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return DANTE_OK;
  } catch (const dante::ConfigError& e) {
    return fail(DANTE_ERR_CONFIG, e.what());
  } catch (const dante::IoError& e) {
    return fail(DANTE_ERR_IO, e.what());
  } catch (const dante::DimensionError& e) {
    return fail(DANTE_ERR_CONFIG, e.what());
  } catch (const std::invalid_argument& e) {
    return fail(DANTE_ERR_CONFIG, e.what());
  } catch (const std::exception& e) {
    return fail(DANTE_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(DANTE_ERR_RUNTIME, "unknown error");
  }
}

dante_status copy_out(const std::string& value, char* buffer, size_t capacity, size_t* length) {
  if (length) *length = value.size();
  if (!buffer) return DANTE_OK;
  if (capacity <= value.size()) return fail(DANTE_ERR_ARGUMENT, "buffer too small");
  std::memcpy(buffer, value.c_str(), value.size() + 1);
  return DANTE_OK;
}

}  // namespace

extern "C" {

const char* dante_version(void) { return "0.1.0"; }

const char* dante_last_error(void) { return last_error.c_str(); }

size_t dante_config_key_count(void) { return dante::config_keys().size(); }

dante_status dante_config_key_info(size_t index, const char** name, const char** kind, const char** help) {
  const auto& keys = dante::config_keys();
  if (index >= keys.size()) return fail(DANTE_ERR_ARGUMENT, "key index out of range");
  const dante::KeySpec& spec = keys[index];
  if (name) *name = spec.name;
  if (kind) {
    switch (spec.type) {
      case dante::KeyType::Real: *kind = "real"; break;
      case dante::KeyType::Count: *kind = "count"; break;
      case dante::KeyType::Text: *kind = "text"; break;
      case dante::KeyType::Choice: *kind = spec.choices; break;
      case dante::KeyType::RealList: *kind = "list"; break;
      case dante::KeyType::MatrixText: *kind = "matrix"; break;
    }
  }
  if (help) *help = spec.help;
  return DANTE_OK;
}

dante_status dante_config_create(dante_config** out) {
  if (!out) return fail(DANTE_ERR_ARGUMENT, "null output pointer");
  return guarded([&] { *out = new dante_config(); });
}

dante_status dante_config_clone(const dante_config* config, dante_config** out) {
  if (!config || !out) return fail(DANTE_ERR_ARGUMENT, "null argument");
  return guarded([&] { *out = new dante_config(*config); });
}

void dante_config_destroy(dante_config* config) { delete config; }

dante_status dante_config_set(dante_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return fail(DANTE_ERR_ARGUMENT, "null argument");
  return guarded([&] { config->config.set(key, value); });
}

dante_status dante_config_load_file(dante_config* config, const char* path) {
  if (!config || !path) return fail(DANTE_ERR_ARGUMENT, "null argument");
  return guarded([&] { config->config.load_file(path); });
}

dante_status dante_config_get(const dante_config* config, const char* key, char* buffer, size_t capacity,
                              size_t* length) {
  if (!config || !key) return fail(DANTE_ERR_ARGUMENT, "null argument");
  const auto value = config->config.get(key);
  if (!value) return fail(DANTE_ERR_CONFIG, std::string("key '") + key + "' is not set");
  return copy_out(*value, buffer, capacity, length);
}

dante_status dante_run_execute(const dante_config* config, dante_run** out) {
  if (!config || !out) return fail(DANTE_ERR_ARGUMENT, "null argument");
  *out = nullptr;
  return guarded([&] { *out = new dante_run{dante::run_experiment(config->config)}; });
}

void dante_run_destroy(dante_run* run) { delete run; }

dante_status dante_run_outer_iterations(const dante_run* run, size_t* out) {
  if (!run || !out) return fail(DANTE_ERR_ARGUMENT, "null argument");
  *out = run->result.run.trace.rows.size();
  return DANTE_OK;
}

dante_status dante_run_summary_value(const dante_run* run, const char* name, double* out) {
  if (!run || !name || !out) return fail(DANTE_ERR_ARGUMENT, "null argument");
  const auto value = run->result.metric(name);
  if (!value) return fail(DANTE_ERR_ARGUMENT, std::string("no summary value '") + name + "'");
  *out = *value;
  return DANTE_OK;
}

dante_status dante_run_final_point(const dante_run* run, double* values, size_t capacity, size_t* length) {
  if (!run) return fail(DANTE_ERR_ARGUMENT, "null argument");
  const dante::Vector& avg = run->result.run.average;
  const auto n = static_cast<size_t>(avg.size());
  if (length) *length = n;
  if (!values) return DANTE_OK;
  if (capacity < n) return fail(DANTE_ERR_ARGUMENT, "buffer too small");
  for (size_t i = 0; i < n; ++i) values[i] = avg[static_cast<dante::Index>(i)];
  return DANTE_OK;
}

dante_status dante_run_write(const dante_run* run, const char* directory) {
  if (!run || !directory) return fail(DANTE_ERR_ARGUMENT, "null argument");
  return guarded([&] { dante::write_outputs(run->result, directory); });
}

dante_status dante_verify(const char* only, int use_c1_override, double c1_override, dante_verify_callback callback,
                          void* user_data, int* failures) {
  dante::AcceptanceOptions options;
  if (use_c1_override) options.c1_override = c1_override;
  if (only && *only) {
    std::stringstream ss(only);
    std::string name;
    while (std::getline(ss, name, ',')) {
      if (!name.empty()) options.only.push_back(name);
    }
  }
  int failed = 0;
  const dante_status status = guarded([&] {
    dante::run_acceptance(options, [&](const dante::CriterionResult& r) {
      if (!r.passed) ++failed;
      if (callback) callback(r.name.c_str(), r.passed ? 1 : 0, r.detail.c_str(), r.seconds, user_data);
    });
  });
  if (failures) *failures = failed;
  return status;
}

}  // extern "C"
