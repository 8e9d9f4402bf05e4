"""int64 numba kernels for the hot loops.

Every kernel guards its multiplications: operands at or above ``LIMIT``
abort with an overflow status and the caller redoes the work with Python
ints.  Support sets are uint64 bitmasks, so these paths need K <= 64.
"""
import numpy as np
from numba import njit, types
from numba.typed import Dict

LIMIT = 2**31
MAX_K = 64

OK = 0
OVERFLOW = 1
FOUND = 2
FULL = 3


@njit(cache=True)
def popcount(x):
    c = 0
    while x:
        x &= x - np.uint64(1)
        c += 1
    return c


@njit(cache=True)
def _gcd(a, b):
    a = abs(a)
    b = abs(b)
    while b:
        a, b = b, a % b
    return a


@njit(cache=True)
def rank_i64(M, nr, nc):
    """Rank of M[:nr, :nc] (destroys M); -1 on overflow."""
    r = 0
    for c in range(nc):
        piv = -1
        for i in range(r, nr):
            if M[i, c] != 0:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for j in range(c, nc):
                t = M[r, j]
                M[r, j] = M[piv, j]
                M[piv, j] = t
        p = M[r, c]
        for i in range(r + 1, nr):
            f = M[i, c]
            if f == 0:
                continue
            if abs(p) >= LIMIT or abs(f) >= LIMIT:
                return -1
            g = 0
            for j in range(c, nc):
                a = M[i, j]
                b = M[r, j]
                if abs(a) >= LIMIT or abs(b) >= LIMIT:
                    return -1
                v = p * a - f * b
                M[i, j] = v
                g = _gcd(g, v)
            if g > 1:
                for j in range(c, nc):
                    M[i, j] //= g
        r += 1
        if r == nr:
            break
    return r


@njit(cache=True)
def det_i64(M, n):
    """Bareiss determinant of M[:n, :n] (destroys M); returns (det, ok)."""
    sign = 1
    prev = 1
    for k in range(n - 1):
        if M[k, k] == 0:
            piv = -1
            for i in range(k + 1, n):
                if M[i, k] != 0:
                    piv = i
                    break
            if piv < 0:
                return 0, True
            for j in range(k, n):
                t = M[k, j]
                M[k, j] = M[piv, j]
                M[piv, j] = t
            sign = -sign
        akk = M[k, k]
        if abs(akk) >= LIMIT:
            return 0, False
        for i in range(k + 1, n):
            f = M[i, k]
            if abs(f) >= LIMIT:
                return 0, False
            for j in range(k + 1, n):
                a = M[i, j]
                b = M[k, j]
                if abs(a) >= LIMIT or abs(b) >= LIMIT:
                    return 0, False
                M[i, j] = (akk * a - f * b) // prev
        prev = akk
    return sign * M[n - 1, n - 1], True


@njit(cache=True)
def next_comb(c, n):
    """Advance combination c (sorted indices < n) in lex order; False at end."""
    k = c.shape[0]
    i = k - 1
    while i >= 0 and c[i] == n - k + i:
        i -= 1
    if i < 0:
        return False
    c[i] += 1
    for j in range(i + 1, k):
        c[j] = c[j - 1] + 1
    return True


@njit(cache=True)
def _load(A, comb, M):
    p = A.shape[0]
    k = comb.shape[0]
    for i in range(p):
        for j in range(k):
            M[i, j] = A[i, comb[j]]


@njit(cache=True)
def minor_sweep(A, comb, count, stop_above_one):
    """Walk ``count`` maximal minors starting at ``comb``.

    Returns (status, processed, nonzero, value).  On OVERFLOW or FOUND the
    combination array is left at the offending subset, which has not been
    counted in ``processed``.
    """
    p = A.shape[0]
    K = A.shape[1]
    M = np.empty((p, p), np.int64)
    nonzero = 0
    done = 0
    while done < count:
        _load(A, comb, M)
        d, ok = det_i64(M, p)
        if not ok:
            return OVERFLOW, done, nonzero, 0
        if d != 0:
            if stop_above_one and abs(d) != 1:
                return FOUND, done, nonzero, d
            nonzero += 1
        done += 1
        if done < count and not next_comb(comb, K):
            break
    return OK, done, nonzero, 0


@njit(cache=True)
def saturation_sweep(A, masks, use_det, comb, count):
    """Sweep p-subsets, deciding saturation by determinant and by circuits.

    Returns (status, processed, det_saturated, circuit_saturated, mismatches).
    """
    p = A.shape[0]
    K = A.shape[1]
    M = np.empty((p, p), np.int64)
    det_sat = 0
    circ_sat = 0
    mismatch = 0
    done = 0
    one = np.uint64(1)
    while done < count:
        fm = np.uint64(0)
        for j in range(p):
            fm |= one << np.uint64(comb[j])
        sat_c = True
        for t in range(masks.shape[0]):
            if (masks[t] & ~fm) == 0:
                sat_c = False
                break
        if sat_c:
            circ_sat += 1
        if use_det:
            _load(A, comb, M)
            d, ok = det_i64(M, p)
            if not ok:
                if sat_c:
                    circ_sat -= 1
                return OVERFLOW, done, det_sat, circ_sat, mismatch
            if d != 0:
                det_sat += 1
            if (d != 0) != sat_c:
                mismatch += 1
        done += 1
        if done < count and not next_comb(comb, K):
            break
    return OK, done, det_sat, circ_sat, mismatch


@njit(cache=True)
def cramer_sweep(A, comb, count, out):
    """Kernel vectors of A restricted to (p+1)-subsets of rank p.

    Each vector is made primitive with its first nonzero entry positive
    and written (zero padded to K) into ``out``.
    Returns (status, processed, written).
    """
    p = A.shape[0]
    K = A.shape[1]
    q = comb.shape[0]
    M = np.empty((p, p), np.int64)
    v = np.empty(q, np.int64)
    sub = np.empty(q, np.int64)
    written = 0
    done = 0
    while done < count:
        nonzero = False
        for skip in range(q):
            t = 0
            for j in range(q):
                if j != skip:
                    sub[t] = comb[j]
                    t += 1
            for i in range(p):
                for j in range(p):
                    M[i, j] = A[i, sub[j]]
            d, ok = det_i64(M, p)
            if not ok:
                return OVERFLOW, done, written
            v[skip] = d if skip % 2 == 0 else -d
            if d != 0:
                nonzero = True
        if nonzero:
            if written >= out.shape[0]:
                return FULL, done, written
            g = 0
            first = 0
            for j in range(q):
                if v[j] != 0:
                    if first == 0:
                        first = v[j]
                    g = _gcd(g, v[j])
            if first < 0:
                g = -g
            for k in range(K):
                out[written, k] = 0
            for j in range(q):
                out[written, comb[j]] = v[j] // g
            written += 1
        done += 1
        if done < count and not next_comb(comb, K):
            break
    return OK, done, written


@njit(cache=True)
def support_mask(v, E):
    m = np.uint64(0)
    one = np.uint64(1)
    for k in range(v.shape[0]):
        if v[k] != 0 and ((E >> np.uint64(k)) & one):
            m |= one << np.uint64(k)
    return m


@njit(cache=True)
def elimination_step(V, m, b, Nidx, G, E, nproc, out):
    """One lifting step of the circuit elimination scheme.

    V[:m] holds the circuits of the projection onto the processed
    coordinates E (full-length vectors of the kernel).  New circuits come
    from pairs u, w that are both nonzero at coordinate b: their
    combination z vanishing at b is a circuit exactly when the kernel
    vectors supported (on E + b) inside supp(z) form a 1-dim space.
    Returns (status, written).
    """
    K = V.shape[1]
    n = Nidx.shape[0]
    one = np.uint64(1)
    Eb = E | (one << np.uint64(b))
    seen = Dict.empty(key_type=types.uint64, value_type=types.int64)
    for i in range(m):
        seen[support_mask(V[i], Eb)] = 1
    idx = np.empty(m, np.int64)
    cnt = 0
    for i in range(m):
        if V[i, b] != 0:
            idx[cnt] = i
            cnt += 1
    z = np.empty(K, np.int64)
    sub = np.empty((n, K), np.int64)
    written = 0
    for ii in range(cnt):
        u = idx[ii]
        ub = V[u, b]
        for jj in range(ii + 1, cnt):
            w = idx[jj]
            wb = V[w, b]
            if abs(ub) >= LIMIT or abs(wb) >= LIMIT:
                return OVERFLOW, written
            D = np.uint64(0)
            for k in range(K):
                x = V[u, k]
                y = V[w, k]
                if abs(x) >= LIMIT or abs(y) >= LIMIT:
                    return OVERFLOW, written
                z[k] = wb * x - ub * y
                if z[k] != 0 and ((E >> np.uint64(k)) & one):
                    D |= one << np.uint64(k)
            if popcount(D) > nproc + 2:
                continue
            if D in seen:
                continue
            rows = 0
            ncols = 0
            for t in range(n):
                j = Nidx[t]
                if (D >> np.uint64(j)) & one:
                    c = 0
                    for k in range(K):
                        if ((Eb >> np.uint64(k)) & one) and not ((D >> np.uint64(k)) & one):
                            sub[rows, c] = G[t, k]
                            c += 1
                    ncols = c
                    rows += 1
            rk = rank_i64(sub, rows, ncols)
            if rk < 0:
                return OVERFLOW, written
            if rows - rk != 1:
                seen[D] = 0
                continue
            seen[D] = 1
            if written >= out.shape[0]:
                return FULL, written
            g = 0
            first = 0
            for k in range(K):
                if z[k] != 0:
                    if first == 0:
                        first = z[k]
                    g = _gcd(g, z[k])
            if first < 0:
                g = -g
            for k in range(K):
                out[written, k] = z[k] // g
            written += 1
    return OK, written


@njit(cache=True)
def sign_masks(v, E):
    pm = np.uint64(0)
    nm = np.uint64(0)
    one = np.uint64(1)
    for k in range(v.shape[0]):
        if (E >> np.uint64(k)) & one:
            if v[k] > 0:
                pm |= one << np.uint64(k)
            elif v[k] < 0:
                nm |= one << np.uint64(k)
    return pm, nm


@njit(cache=True)
def _conformal_on(g, s, E):
    one = np.uint64(1)
    for k in range(g.shape[0]):
        if (E >> np.uint64(k)) & one:
            x = g[k]
            if x > 0:
                if x > s[k]:
                    return False
            elif x < 0:
                if x < s[k]:
                    return False
    return True


@njit(cache=True)
def completion(G, m, red, compat, lift, start):
    """Normal-form completion on a sign-symmetric set G[:m].

    Reduction g -> s needs g conformal to s on the coordinates in ``red``.
    Pairs (a, b) are formed for a >= ``start`` against every b < a; a pair
    is skipped unless both are sign-compatible on ``compat``.  With
    ``lift >= 0`` the pair must also have opposite signs at coordinate
    ``lift``; with ``lift < 0`` (plain completion) sign-compatible pairs
    on ``red`` are skipped since their sum reduces to zero.
    New elements are appended together with their negations.
    Returns (status, m).
    """
    K = G.shape[1]
    cap = G.shape[0]
    PM = np.empty(cap, np.uint64)
    NM = np.empty(cap, np.uint64)
    for r in range(m):
        PM[r], NM[r] = sign_masks(G[r], red)
    s = np.empty(K, np.int64)
    a = max(start, 1)
    while a < m:
        ca_p = PM[a] & compat
        ca_n = NM[a] & compat
        for b in range(a):
            if (ca_p & NM[b]) != 0 or (ca_n & PM[b]) != 0:
                continue
            if lift >= 0:
                if G[a, lift] * G[b, lift] >= 0:
                    continue
            elif (PM[a] & NM[b]) == 0 and (NM[a] & PM[b]) == 0:
                continue
            for k in range(K):
                x = G[a, k] + G[b, k]
                if abs(x) >= LIMIT:
                    return OVERFLOW, m
                s[k] = x
            sp, sn = sign_masks(s, red)
            g = 0
            while g < m and (sp | sn) != 0:
                if (PM[g] & ~sp) == 0 and (NM[g] & ~sn) == 0 and (PM[g] | NM[g]) != 0 \
                        and _conformal_on(G[g], s, red):
                    for k in range(K):
                        s[k] -= G[g, k]
                    sp, sn = sign_masks(s, red)
                    continue
                g += 1
            if (sp | sn) == 0:
                continue
            if m + 2 > cap:
                return FULL, m
            for k in range(K):
                G[m, k] = s[k]
                G[m + 1, k] = -s[k]
            PM[m] = sp
            NM[m] = sn
            PM[m + 1] = sn
            NM[m + 1] = sp
            m += 2
        a += 1
    return OK, m


@njit(cache=True)
def conformal_minimal(G, m, E):
    """Flags of the elements of G[:m] not conformally dominated on E."""
    K = G.shape[1]
    keep = np.ones(m, np.bool_)
    PM = np.empty(m, np.uint64)
    NM = np.empty(m, np.uint64)
    for r in range(m):
        PM[r], NM[r] = sign_masks(G[r], E)
    for a in range(m):
        if (PM[a] | NM[a]) == 0:
            keep[a] = False
            continue
        for g in range(m):
            if g == a or (PM[g] | NM[g]) == 0:
                continue
            if (PM[g] & ~PM[a]) == 0 and (NM[g] & ~NM[a]) == 0 and _conformal_on(G[g], G[a], E):
                # equal vectors: keep the first copy only
                same = True
                for k in range(K):
                    if G[g, k] != G[a, k]:
                        same = False
                        break
                if not same or g < a:
                    keep[a] = False
                    break
    return keep


@njit(cache=True)
def _signable(M, rows, n, S, rem, sign, max_work, work):
    """Depth-first search for a +-1 signing of the given rows whose signed
    column sums all lie in {-1, 0, 1}.  Returns (found, work)."""
    c = M.shape[1]
    # rem[t, j] = nonzeros of column j among rows[t:n]
    for j in range(c):
        rem[n, j] = 0
    for t in range(n - 1, -1, -1):
        for j in range(c):
            rem[t, j] = rem[t + 1, j] + abs(M[rows[t], j])
    for j in range(c):
        S[j] = 0
    t = 0
    sign[0] = 1  # the all-flipped signing is equivalent
    while True:
        work += 1
        if work > max_work:
            return False, work
        r = rows[t]
        ok = True
        for j in range(c):
            S[j] += sign[t] * M[r, j]
            v = S[j]
            if v < 0:
                v = -v
            if v - rem[t + 1, j] > 1:
                ok = False
        if ok:
            t += 1
            if t == n:
                return True, work
            sign[t] = 1
            continue
        # undo row t and move to its next sign, backtracking as needed
        while True:
            for j in range(c):
                S[j] -= sign[t] * M[rows[t], j]
            if sign[t] == 1 and t > 0:
                sign[t] = -1
                break
            t -= 1
            if t < 0:
                return False, work
            # the row we return to was applied; loop undoes it next


@njit(cache=True)
def ghouila_houri(M, max_work):
    """Check every nonempty row subset of M for an equitable signing.

    Returns (status, mask, work): OK when all subsets pass, FOUND with the
    violating row mask, FULL when the work budget ran out.
    """
    r = M.shape[0]
    c = M.shape[1]
    rows = np.empty(r, np.int64)
    S = np.zeros(c, np.int64)
    rem = np.zeros((r + 1, c), np.int64)
    sign = np.zeros(r, np.int64)
    work = 0
    total = np.int64(1) << np.int64(r)
    for mask in range(1, total):
        n = 0
        for i in range(r):
            if (mask >> i) & 1:
                rows[n] = i
                n += 1
        found, work = _signable(M, rows, n, S, rem, sign, max_work, work)
        if not found:
            if work > max_work:
                return FULL, mask, work
            return FOUND, mask, work
    return OK, 0, work
