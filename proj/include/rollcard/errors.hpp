#pragma once

#include <stdexcept>
#include <string>

namespace rollcard {

// Base class for every toolkit error. Each concrete error carries a stable
// machine-readable code alongside the human message.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

// --- row parsing / serialization ---

class MalformedRecord : public Error {
 public:
  explicit MalformedRecord(const std::string& message)
      : Error("MalformedRecord", message) {}
};

class MissingRequiredColumn : public Error {
 public:
  explicit MissingRequiredColumn(const std::string& column)
      : Error("MissingRequiredColumn", "missing required column: " + column),
        column_(column) {}
  const std::string& column() const noexcept { return column_; }

 private:
  std::string column_;
};

class TypeMismatch : public Error {
 public:
  TypeMismatch(const std::string& column, const std::string& expected)
      : Error("TypeMismatch",
              "column " + column + ": expected " + expected),
        column_(column),
        expected_(expected) {}
  const std::string& column() const noexcept { return column_; }
  const std::string& expected() const noexcept { return expected_; }

 private:
  std::string column_;
  std::string expected_;
};

class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& message)
      : Error("InvariantViolation", message) {}
};

// --- bundle io ---

class IoFailure : public Error {
 public:
  explicit IoFailure(const std::string& message)
      : Error("IoFailure", message) {}
};

class HashMismatch : public Error {
 public:
  explicit HashMismatch(const std::string& stream)
      : Error("HashMismatch", "stream hash mismatch: " + stream),
        stream_(stream) {}
  const std::string& stream() const noexcept { return stream_; }

 private:
  std::string stream_;
};

class MissingStream : public Error {
 public:
  explicit MissingStream(const std::string& stream)
      : Error("MissingStream", "stream file missing: " + stream) {}
};

class UnsupportedMajorVersion : public Error {
 public:
  UnsupportedMajorVersion(int found, int supported)
      : Error("UnsupportedMajorVersion",
              "bundle format major version " + std::to_string(found) +
                  " not supported (toolkit supports " +
                  std::to_string(supported) + ")") {}
};

class OversizedInlinePayload : public Error {
 public:
  OversizedInlinePayload(const std::string& event_id, std::size_t byte_length)
      : Error("OversizedInlinePayload",
              "event " + event_id + " carries an inline payload of " +
                  std::to_string(byte_length) +
                  " bytes, above the inline cap") {}
};

class UnknownDigest : public Error {
 public:
  explicit UnknownDigest(const std::string& digest)
      : Error("UnknownDigest", "blob digest not in store: " + digest) {}
};

class DigestMismatch : public Error {
 public:
  explicit DigestMismatch(const std::string& digest)
      : Error("DigestMismatch",
              "blob bytes do not hash to their filename: " + digest) {}
};

class RunIdMismatch : public Error {
 public:
  RunIdMismatch(const std::string& earlier, const std::string& later)
      : Error("RunIdMismatch",
              "bundles carry different run ids: " + earlier + " vs " + later) {}
};

// --- tracked access ---

class UnknownStream : public Error {
 public:
  explicit UnknownStream(const std::string& stream)
      : Error("UnknownStream", "unknown stream: " + stream) {}
};

class UnknownColumn : public Error {
 public:
  UnknownColumn(const std::string& stream, const std::string& column)
      : Error("UnknownColumn",
              "unknown column " + column + " in stream " + stream) {}
};

class AlreadyFinished : public Error {
 public:
  AlreadyFinished()
      : Error("AlreadyFinished", "tracked reader already finished") {}
};

// --- views ---

class MissingSourceField : public Error {
 public:
  MissingSourceField(const std::string& field)
      : Error("MissingSourceField", "card lacks source field: " + field),
        field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class UnknownQuantity : public Error {
 public:
  explicit UnknownQuantity(const std::string& name)
      : Error("UnknownQuantity", "no registered quantity: " + name) {}
};

// --- rules ---

class DuplicateRule : public Error {
 public:
  DuplicateRule(const std::string& name, const std::string& version)
      : Error("DuplicateRule",
              "rule already registered: " + name + "@" + version) {}
};

class EmptyDenominator : public Error {
 public:
  explicit EmptyDenominator(const std::string& rule)
      : Error("EmptyDenominator",
              "policy excluded every run from the denominator of " + rule) {}
};

class UnknownTier : public Error {
 public:
  explicit UnknownTier(const std::string& tier)
      : Error("UnknownTier", "tier not in configured tier list: " + tier) {}
};

class MissingVerdictColumn : public Error {
 public:
  explicit MissingVerdictColumn(const std::string& column)
      : Error("MissingVerdictColumn",
              "no preserved judge verdict column: " + column) {}
};

class MissingStateRecord : public Error {
 public:
  explicit MissingStateRecord(const std::string& run_id)
      : Error("MissingStateRecord",
              "run " + run_id + " preserves no final environment state") {}
};

class PropagatedErrorStatus : public Error {
 public:
  explicit PropagatedErrorStatus(const std::string& run_id)
      : Error("PropagatedErrorStatus",
              "run " + run_id + " has an error status and policy says propagate") {}
};

// --- discrepancy ---

class RuleNotApplicable : public Error {
 public:
  RuleNotApplicable(const std::string& system, const std::string& rule,
                    const std::string& missing)
      : Error("RuleNotApplicable", "rule " + rule + " not applicable to system " +
                                       system + ": missing " + missing) {}
};

class RulesDifferBeyondDenominator : public Error {
 public:
  RulesDifferBeyondDenominator()
      : Error("RulesDifferBeyondDenominator",
              "decomposition requires rules differing only in "
              "on_missing_artifact") {}
};

// --- synth ---

class InvalidProfile : public Error {
 public:
  explicit InvalidProfile(const std::string& message)
      : Error("InvalidProfile", message) {}
};

class UnknownFixture : public Error {
 public:
  explicit UnknownFixture(const std::string& name)
      : Error("UnknownFixture", "no named fixture: " + name) {}
};

class UnknownDefectClass : public Error {
 public:
  explicit UnknownDefectClass(const std::string& name)
      : Error("UnknownDefectClass", "no defect class: " + name) {}
};

}  // namespace rollcard
