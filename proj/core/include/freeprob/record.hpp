#pragma once

#include <iosfwd>
#include <string>

namespace freeprob {

/// One checked identity or inequality.  For inequalities lhs <= rhs the
/// margin is rhs - lhs; for identities it is |lhs - rhs|.  `reported`
/// records carry diagnostic margins with no pass/fail semantics.
struct VerificationRecord {
    enum class Status { pass, fail, reported };

    std::string check_id;
    std::string anchor;  // equation/theorem label of the checked statement
    std::string measure_id;
    std::string params;
    double lhs = 0.0;
    double rhs = 0.0;
    double margin = 0.0;
    double tolerance = 0.0;
    Status status = Status::reported;

    static VerificationRecord inequality(std::string check_id, std::string anchor,
                                         std::string measure_id, std::string params,
                                         double lhs, double rhs, double tolerance);
    static VerificationRecord identity(std::string check_id, std::string anchor,
                                       std::string measure_id, std::string params,
                                       double lhs, double rhs, double tolerance);
    static VerificationRecord reported(std::string check_id, std::string anchor,
                                       std::string measure_id, std::string params,
                                       double lhs, double rhs, double margin,
                                       double tolerance);
    bool passed() const { return status != Status::fail; }
};

const char* to_string(VerificationRecord::Status s);

void record_csv_header(std::ostream& os);
void record_csv_row(const VerificationRecord& r, std::ostream& os);

}  // namespace freeprob
