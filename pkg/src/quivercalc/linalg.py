"""Exact linear algebra over the rationals and prime fields.

Scalars are plain Python values: ``fractions.Fraction`` over Q, ints in
``[0, p)`` over F_p. A :class:`Matrix` carries its field tag; all
operations are exact, and basis-producing operations return canonical
reduced column-echelon bases so equality checks downstream are syntactic.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import InputError


class Field:
    """Exact scalar arithmetic plus parse/format for one field."""

    name: str = "?"

    def zero(self):
        raise NotImplementedError

    def one(self):
        raise NotImplementedError

    def of_int(self, n: int):
        raise NotImplementedError

    def coerce(self, x):
        raise NotImplementedError

    def add(self, a, b):
        raise NotImplementedError

    def sub(self, a, b):
        raise NotImplementedError

    def mul(self, a, b):
        raise NotImplementedError

    def neg(self, a):
        raise NotImplementedError

    def inv(self, a):
        raise NotImplementedError

    def parse_scalar(self, s: str):
        raise NotImplementedError

    def format_scalar(self, a) -> str:
        raise NotImplementedError

    def random_scalar(self, rng):
        raise NotImplementedError

    def __repr__(self):
        return self.name


class RationalField(Field):
    name = "Q"

    def zero(self):
        return Fraction(0)

    def one(self):
        return Fraction(1)

    def of_int(self, n):
        return Fraction(n)

    def coerce(self, x):
        if isinstance(x, bool):
            raise InputError(f"not a rational scalar: {x!r}")
        if isinstance(x, (int, Fraction)):
            return Fraction(x)
        if isinstance(x, str):
            return self.parse_scalar(x)
        raise InputError(f"not a rational scalar: {x!r}")

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def neg(self, a):
        return -a

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero")
        return 1 / a

    def parse_scalar(self, s):
        try:
            return Fraction(s.strip())
        except (ValueError, ZeroDivisionError) as exc:
            raise InputError(f"bad rational scalar {s!r}") from exc

    def format_scalar(self, a):
        return str(a)

    def random_scalar(self, rng):
        return Fraction(rng.randint(-9, 9))


class PrimeField(Field):
    def __init__(self, p: int):
        if p < 2 or p > 2**31 or any(p % d == 0 for d in range(2, min(p, 46341))):
            raise InputError(f"modulus must be a prime <= 2^31, got {p}")
        self.p = p
        self.name = f"F{p}"

    def zero(self):
        return 0

    def one(self):
        return 1 % self.p

    def of_int(self, n):
        return n % self.p

    def coerce(self, x):
        if isinstance(x, bool):
            raise InputError(f"not a residue: {x!r}")
        if isinstance(x, int):
            return x % self.p
        if isinstance(x, str):
            return self.parse_scalar(x)
        raise InputError(f"not a residue mod {self.p}: {x!r}")

    def add(self, a, b):
        return (a + b) % self.p

    def sub(self, a, b):
        return (a - b) % self.p

    def mul(self, a, b):
        return (a * b) % self.p

    def neg(self, a):
        return (-a) % self.p

    def inv(self, a):
        if a % self.p == 0:
            raise ZeroDivisionError("inverse of zero")
        return pow(a, self.p - 2, self.p)

    def parse_scalar(self, s):
        text = s.strip()
        if "mod" in text:
            value, _, mod = text.partition("mod")
            if int(mod) != self.p:
                raise InputError(f"residue {s!r} has wrong modulus for F{self.p}")
            text = value
        try:
            return int(text) % self.p
        except ValueError as exc:
            raise InputError(f"bad residue {s!r}") from exc

    def format_scalar(self, a):
        return f"{a % self.p} mod {self.p}"

    def random_scalar(self, rng):
        return rng.randrange(self.p)


QQ = RationalField()

_prime_fields: dict[int, PrimeField] = {}


def GF(p: int) -> PrimeField:
    if p not in _prime_fields:
        _prime_fields[p] = PrimeField(p)
    return _prime_fields[p]


def field_by_name(name: str) -> Field:
    """Resolve a field tag: "Q" or "F<p>"."""
    if name == "Q":
        return QQ
    if name.startswith("F") and name[1:].isdigit():
        return GF(int(name[1:]))
    raise InputError(f"unknown field tag {name!r}")


def _check_same_field(*mats: "Matrix"):
    fields = {id(m.field) for m in mats}
    if len(fields) > 1:
        raise InputError("mixed-field input")


@dataclass(frozen=True)
class Matrix:
    """Immutable exact matrix; 0xN and Nx0 shapes are legal."""

    field: Field
    rows: int
    cols: int
    data: tuple  # tuple of row tuples

    @staticmethod
    def from_rows(field: Field, rows: Sequence[Sequence]) -> "Matrix":
        data = tuple(tuple(field.coerce(x) for x in row) for row in rows)
        ncols = len(data[0]) if data else 0
        if any(len(row) != ncols for row in data):
            raise InputError("ragged matrix rows")
        return Matrix(field, len(data), ncols, data)

    @staticmethod
    def zeros(field: Field, rows: int, cols: int) -> "Matrix":
        z = field.zero()
        return Matrix(field, rows, cols, tuple((z,) * cols for _ in range(rows)))

    @staticmethod
    def identity(field: Field, n: int) -> "Matrix":
        z, o = field.zero(), field.one()
        return Matrix(
            field, n, n, tuple(tuple(o if i == j else z for j in range(n)) for i in range(n))
        )

    def __add__(self, other: "Matrix") -> "Matrix":
        _check_same_field(self, other)
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise InputError("shape mismatch in matrix addition")
        f = self.field
        return Matrix(
            f,
            self.rows,
            self.cols,
            tuple(
                tuple(f.add(a, b) for a, b in zip(ra, rb))
                for ra, rb in zip(self.data, other.data)
            ),
        )

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self + other.scale(self.field.of_int(-1))

    def __matmul__(self, other: "Matrix") -> "Matrix":
        _check_same_field(self, other)
        if self.cols != other.rows:
            raise InputError("shape mismatch in matrix product")
        f = self.field
        z = f.zero()
        bt = tuple(zip(*other.data)) if other.data and other.cols else ((),) * other.cols
        out = []
        for row in self.data:
            out_row = []
            for col in bt:
                acc = z
                for a, b in zip(row, col):
                    acc = f.add(acc, f.mul(a, b))
                out_row.append(acc)
            out.append(tuple(out_row))
        if self.rows == 0:
            out = []
        return Matrix(f, self.rows, other.cols, tuple(out))

    def scale(self, c) -> "Matrix":
        f = self.field
        return Matrix(
            f, self.rows, self.cols, tuple(tuple(f.mul(c, x) for x in row) for row in self.data)
        )

    def transpose(self) -> "Matrix":
        data = tuple(tuple(self.data[i][j] for i in range(self.rows)) for j in range(self.cols))
        return Matrix(self.field, self.cols, self.rows, data)

    def is_zero(self) -> bool:
        z = self.field.zero()
        return all(x == z for row in self.data for x in row)

    def is_identity(self) -> bool:
        if self.rows != self.cols:
            return False
        return self == Matrix.identity(self.field, self.rows)

    def is_square(self) -> bool:
        return self.rows == self.cols

    def hstack(self, other: "Matrix") -> "Matrix":
        _check_same_field(self, other)
        if self.rows != other.rows:
            raise InputError("shape mismatch in hstack")
        return Matrix(
            self.field,
            self.rows,
            self.cols + other.cols,
            tuple(ra + rb for ra, rb in zip(self.data, other.data)),
        )

    def vstack(self, other: "Matrix") -> "Matrix":
        _check_same_field(self, other)
        if self.cols != other.cols:
            raise InputError("shape mismatch in vstack")
        return Matrix(self.field, self.rows + other.rows, self.cols, self.data + other.data)

    def column(self, j: int) -> tuple:
        return tuple(row[j] for row in self.data)

    def columns(self) -> list[tuple]:
        return [self.column(j) for j in range(self.cols)]

    def submatrix_columns(self, col_indices: Sequence[int]) -> "Matrix":
        return Matrix(
            self.field,
            self.rows,
            len(col_indices),
            tuple(tuple(row[j] for j in col_indices) for row in self.data),
        )

    def pow(self, k: int) -> "Matrix":
        if not self.is_square():
            raise InputError("matrix power needs a square matrix")
        result = Matrix.identity(self.field, self.rows)
        base = self
        while k > 0:
            if k & 1:
                result = result @ base
            base = base @ base
            k >>= 1
        return result

    # -- elimination ----------------------------------------------------

    def _rref(self) -> tuple[list[list], list[int]]:
        """Gauss-Jordan on a row copy; returns (reduced rows, pivot cols)."""
        f = self.field
        z = f.zero()
        mat = [list(row) for row in self.data]
        pivots: list[int] = []
        r = 0
        for c in range(self.cols):
            pivot_row = None
            for i in range(r, self.rows):
                if mat[i][c] != z:
                    pivot_row = i
                    break
            if pivot_row is None:
                continue
            mat[r], mat[pivot_row] = mat[pivot_row], mat[r]
            inv = f.inv(mat[r][c])
            mat[r] = [f.mul(inv, x) for x in mat[r]]
            for i in range(self.rows):
                if i != r and mat[i][c] != z:
                    factor = mat[i][c]
                    mat[i] = [f.sub(x, f.mul(factor, y)) for x, y in zip(mat[i], mat[r])]
            pivots.append(c)
            r += 1
            if r == self.rows:
                break
        return mat, pivots

    def rref(self) -> "Matrix":
        mat, _ = self._rref()
        return Matrix(self.field, self.rows, self.cols, tuple(tuple(row) for row in mat))

    def rank(self) -> int:
        _, pivots = self._rref()
        return len(pivots)

    def kernel_basis(self) -> "Matrix":
        """Canonical basis of {x : self @ x = 0}, one basis vector per column."""
        f = self.field
        z, o = f.zero(), f.one()
        mat, pivots = self._rref()
        pivot_set = set(pivots)
        free = [c for c in range(self.cols) if c not in pivot_set]
        vectors = []
        for fc in free:
            v = [z] * self.cols
            v[fc] = o
            for r, pc in enumerate(pivots):
                v[pc] = f.neg(mat[r][fc])
            vectors.append(v)
        return _canonical_span(f, self.cols, vectors)

    def image_basis(self) -> "Matrix":
        """Canonical basis of the column space."""
        return _canonical_span(self.field, self.rows, [list(c) for c in self.columns()])

    def solve(self, b: "Matrix") -> "Matrix | None":
        """A particular solution of ``self @ x = b``, or None if inconsistent."""
        _check_same_field(self, b)
        if b.rows != self.rows:
            raise InputError("shape mismatch in solve")
        f = self.field
        z = f.zero()
        aug = self.hstack(b)
        mat, pivots = aug._rref()
        # Any pivot in the b-block means an inconsistent row.
        if any(p >= self.cols for p in pivots):
            return None
        sol = [[z] * b.cols for _ in range(self.cols)]
        for r, pc in enumerate(pivots):
            for j in range(b.cols):
                sol[pc][j] = mat[r][self.cols + j]
        return Matrix(f, self.cols, b.cols, tuple(tuple(row) for row in sol))

    def inverse(self) -> "Matrix | None":
        if not self.is_square():
            return None
        sol = self.solve(Matrix.identity(self.field, self.rows))
        if sol is None or (self @ sol) != Matrix.identity(self.field, self.rows):
            return None
        return sol

    def is_invertible(self) -> bool:
        return self.is_square() and self.rank() == self.rows

    def is_nilpotent(self) -> bool:
        if not self.is_square():
            return False
        return self.pow(max(self.rows, 1)).is_zero()

    def to_strings(self) -> list[list[str]]:
        return [[self.field.format_scalar(x) for x in row] for row in self.data]

    def __repr__(self):
        if self.rows == 0 or self.cols == 0:
            return f"Matrix({self.field.name}, {self.rows}x{self.cols})"
        body = "; ".join(" ".join(self.field.format_scalar(x) for x in row) for row in self.data)
        return f"Matrix({self.field.name}, [{body}])"


def _canonical_span(field: Field, dim: int, vectors: list[list]) -> Matrix:
    """Canonical reduced column-echelon basis of span(vectors) in F^dim.

    Rows of the RREF of the generator matrix are unique for the subspace;
    returned as columns.
    """
    if not vectors:
        return Matrix.zeros(field, dim, 0)
    gen = Matrix(field, len(vectors), dim, tuple(tuple(v) for v in vectors))
    mat, pivots = gen._rref()
    basis_rows = mat[: len(pivots)]
    return Matrix(
        field, dim, len(basis_rows), tuple(tuple(row[i] for row in basis_rows) for i in range(dim))
    )


def kron(a: Matrix, b: Matrix) -> Matrix:
    """Kronecker product, row-major convention."""
    _check_same_field(a, b)
    f = a.field
    rows = a.rows * b.rows
    cols = a.cols * b.cols
    data = []
    for i in range(rows):
        ia, ib = divmod(i, b.rows)
        row = []
        for j in range(cols):
            ja, jb = divmod(j, b.cols)
            row.append(f.mul(a.data[ia][ja], b.data[ib][jb]))
        data.append(tuple(row))
    return Matrix(f, rows, cols, tuple(data))


def block_diag(field: Field, blocks: Sequence[Matrix]) -> Matrix:
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = Matrix.zeros(field, rows, cols)
    data = [list(row) for row in out.data]
    r0 = c0 = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                data[r0 + i][c0 + j] = b.data[i][j]
        r0 += b.rows
        c0 += b.cols
    return Matrix(field, rows, cols, tuple(tuple(row) for row in data))


def random_matrix(field: Field, rows: int, cols: int, rng) -> Matrix:
    return Matrix(
        field,
        rows,
        cols,
        tuple(tuple(field.random_scalar(rng) for _ in range(cols)) for _ in range(rows)),
    )


def random_invertible(field: Field, n: int, rng) -> Matrix:
    if n == 0:
        return Matrix.zeros(field, 0, 0)
    while True:
        m = random_matrix(field, n, n, rng)
        if m.is_invertible():
            return m


# -- spec operations ----------------------------------------------------


def rank_kernel_image(m: Matrix) -> tuple[int, Matrix, Matrix]:
    """Rank plus canonical kernel and image bases; rank + kernel cols = cols."""
    kernel = m.kernel_basis()
    image = m.image_basis()
    return image.cols, kernel, image


@dataclass(frozen=True)
class AffineSolutionSet:
    """All solutions of a @ x = b: particular + span(homogeneous)."""

    particular: Matrix
    homogeneous: Matrix


def solve_linear(a: Matrix, b: Matrix) -> AffineSolutionSet | None:
    """Solve a @ x = b exactly; None when inconsistent."""
    particular = a.solve(b)
    if particular is None:
        return None
    return AffineSolutionSet(particular, a.kernel_basis())


def fitting_projector(e: Matrix) -> Matrix:
    """Projector onto the stable image of e along its stable kernel.

    Computed from e^n at n = dimension; equals 0 for nilpotent e and the
    identity for invertible e. Commutes with e.
    """
    if not e.is_square():
        raise InputError("fitting projector needs a square matrix")
    n = e.rows
    if n == 0:
        return e
    stable = e.pow(n)
    image = stable.image_basis()
    kernel = stable.kernel_basis()
    if image.cols + kernel.cols != n:
        raise InputError("fitting decomposition failed (not over a field?)")
    basis = image.hstack(kernel)
    inv = basis.inverse()
    if inv is None:
        raise InputError("fitting decomposition failed: image and kernel overlap")
    selector = block_diag(
        e.field, [Matrix.identity(e.field, image.cols), Matrix.zeros(e.field, kernel.cols, kernel.cols)]
    )
    return basis @ selector @ inv


def fitting_split(e: Matrix) -> Matrix | None:
    """A nonzero non-identity idempotent commuting with e, or None.

    None exactly when e is nilpotent or invertible, where the Fitting
    projector degenerates to 0 or the identity.
    """
    p = fitting_projector(e)
    if p.is_zero() or p.is_identity():
        return None
    return p
