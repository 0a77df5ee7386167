#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace emsim {

/// Root of every exception thrown by emsim.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Input / configuration errors (CLI exit code 3)
// ---------------------------------------------------------------------------

class MissingFile : public Error {
 public:
  explicit MissingFile(std::string path)
      : Error("missing or unreadable file: " + path), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A document or CSV row does not match the expected schema.
class SchemaViolation : public Error {
 public:
  SchemaViolation(std::string field, std::string reason,
                  std::optional<std::size_t> row = std::nullopt)
      : Error(compose(field, reason, row)),
        field_(std::move(field)),
        reason_(std::move(reason)),
        row_(row) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& reason() const noexcept { return reason_; }
  std::optional<std::size_t> row() const noexcept { return row_; }

 private:
  static std::string compose(const std::string& field, const std::string& reason,
                             std::optional<std::size_t> row) {
    std::string msg = "schema violation in '" + field + "': " + reason;
    if (row) msg += " (row " + std::to_string(*row) + ")";
    return msg;
  }

  std::string field_;
  std::string reason_;
  std::optional<std::size_t> row_;
};

/// An identifier referenced somewhere does not resolve to a declared entity.
class CrossRefError : public Error {
 public:
  explicit CrossRefError(std::string id, const std::string& context = {})
      : Error("unresolved reference '" + id + "'" +
              (context.empty() ? std::string{} : " in " + context)),
        id_(std::move(id)) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

/// A semantic constraint on otherwise well-formed input is violated.
class InvariantViolation : public Error {
 public:
  explicit InvariantViolation(const std::string& description)
      : Error("invariant violation: " + description) {}
};

/// A referral group has no member ED.
class NoEligibleED : public Error {
 public:
  explicit NoEligibleED(std::string group)
      : Error("no emergency department belongs to referral group '" + group + "'"),
        group_(std::move(group)) {}
  const std::string& group() const noexcept { return group_; }

 private:
  std::string group_;
};

// ---------------------------------------------------------------------------
// Numerical / statistical preconditions
// ---------------------------------------------------------------------------

class EmptySample : public Error {
 public:
  EmptySample() : Error("sample is empty") {}
};

class SampleTooSmall : public Error {
 public:
  SampleTooSmall(std::size_t got, std::size_t need)
      : Error("sample too small: " + std::to_string(got) + " < " + std::to_string(need)) {}
};

class EmptyObservations : public Error {
 public:
  EmptyObservations() : Error("no calibration observations in group") {}
};

class UnknownPair : public Error {
 public:
  UnknownPair(const std::string& origin, const std::string& destination, const std::string& leg)
      : Error("no nominal travel time for " + origin + " -> " + destination + " (" + leg + ")") {}
};

class EmptyHistory : public Error {
 public:
  EmptyHistory() : Error("historical call list is empty") {}
};

class NoCalls : public Error {
 public:
  explicit NoCalls(const std::string& urgency)
      : Error("no measured calls for urgency class " + urgency) {}
};

class TooFewReplications : public Error {
 public:
  explicit TooFewReplications(std::size_t n)
      : Error("at least 2 replications required, got " + std::to_string(n)) {}
};

class MissingTarget : public Error {
 public:
  explicit MissingTarget(std::string kpi)
      : Error("no historical target for KPI '" + kpi + "'"), kpi_(std::move(kpi)) {}
  const std::string& kpi() const noexcept { return kpi_; }

 private:
  std::string kpi_;
};

class LengthMismatch : public Error {
 public:
  LengthMismatch(std::size_t a, std::size_t b)
      : Error("paired vectors differ in length: " + std::to_string(a) + " vs " +
              std::to_string(b)) {}
};

class IncompleteGrid : public Error {
 public:
  explicit IncompleteGrid(const std::string& what) : Error("incomplete comparison grid: " + what) {}
};

class SeedMismatch : public Error {
 public:
  SeedMismatch(unsigned long long a, unsigned long long b)
      : Error("base seeds differ (" + std::to_string(a) + " vs " + std::to_string(b) +
              "); common random numbers would not hold") {}
};

class ReplicationCountMismatch : public Error {
 public:
  ReplicationCountMismatch(std::size_t a, std::size_t b)
      : Error("replication counts differ: " + std::to_string(a) + " vs " + std::to_string(b)) {}
};

/// The simulator detected a broken internal invariant (CLI exit code 4).
class InternalInvariantBreach : public Error {
 public:
  explicit InternalInvariantBreach(const std::string& what)
      : Error("internal invariant breach: " + what) {}
};

}  // namespace emsim
