#pragma once

#include <exception>
#include <new>

#include "landseg/error.hpp"

namespace landseg::cli {

template <typename Fn>
auto run_stage(const std::string& stage, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const UsageError& e) {
    throw UsageError(stage + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(stage + ": " + e.what());
  } catch (const NumericError& e) {
    throw NumericError(stage + ": " + e.what());
  } catch (const std::bad_alloc&) {
    throw NumericError(stage + ": out of memory");
  } catch (const Error& e) {
    throw Error(stage + ": " + e.what());
  } catch (const std::exception& e) {
    throw DataError(stage + ": " + e.what());
  }
}

}  // namespace landseg::cli
