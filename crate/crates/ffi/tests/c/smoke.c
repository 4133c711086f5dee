/* SPDX-License-Identifier: Apache-2.0 */
#include <math.h>
#include <stdio.h>
#include "qconfine.h"

int main(void) {
    QcHamiltonian *h = NULL;
    if (qc_hamiltonian_family("Hm", 0.0, &h) != QC_STATUS_OK) return 1;
    double eps = 0.0;
    if (qc_exact_leakage(h, &eps) != QC_STATUS_OK) return 2;
    qc_hamiltonian_free(h);
    if (fabs(eps - 5.1117e-2) > 1e-5) return 3;

    double bad[4] = {0.0, 1.0, 0.0, 0.0};
    if (qc_hamiltonian_new(bad, NULL, 2, &h) != QC_STATUS_NON_HERMITIAN) return 4;
    if (qc_last_error() == NULL) return 5;

    QcResolution r;
    if (qc_max_resolution(1e-4, 1e-8, &r) != QC_STATUS_OK) return 6;
    printf("%.1f\n", r.delta_f);
    return 0;
}
