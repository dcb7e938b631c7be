"""results store

Revision ID: 3f9c1a7e2b40
Revises: 
Create Date: 2026-10-18 09:12:40.118203

"""
from typing import Sequence, Union

from alembic import op
import sqlalchemy as sa
from sqlalchemy.dialects import postgresql

# revision identifiers, used by Alembic.
revision: str = '3f9c1a7e2b40'
down_revision: Union[str, None] = None
branch_labels: Union[str, Sequence[str], None] = None
depends_on: Union[str, Sequence[str], None] = None

json_type = sa.JSON().with_variant(postgresql.JSONB(astext_type=sa.Text()), 'postgresql')


def upgrade() -> None:
    # ### commands auto generated by Alembic - please adjust! ###
    op.create_table('experiment_runs',
    sa.Column('id', sa.Integer(), nullable=False),
    sa.Column('experiment_id', sa.String(length=255), nullable=False),
    sa.Column('input_hash', sa.String(length=40), nullable=False),
    sa.Column('L', sa.Integer(), nullable=False),
    sa.Column('n', sa.Integer(), nullable=False),
    sa.Column('regime', sa.String(length=100), nullable=False),
    sa.Column('status', sa.Enum('PASS', 'FAIL', 'ERROR', name='runstatus'), nullable=False),
    sa.Column('exploratory', sa.Boolean(), nullable=False),
    sa.Column('replicas', sa.Integer(), nullable=False),
    sa.Column('audits', sa.BigInteger(), nullable=False),
    sa.Column('config', json_type, nullable=False),
    sa.Column('metrics', json_type, nullable=True),
    sa.Column('failures', json_type, nullable=True),
    sa.Column('created_at', sa.DateTime(), nullable=False),
    sa.PrimaryKeyConstraint('id', name=op.f('pk_experiment_runs'))
    )
    op.create_index('idx_run_created_at', 'experiment_runs', ['created_at'], unique=False)
    op.create_index('idx_run_experiment_size', 'experiment_runs', ['experiment_id', 'L'], unique=False)
    op.create_index(op.f('ix_experiment_runs_experiment_id'), 'experiment_runs', ['experiment_id'], unique=False)
    op.create_index(op.f('ix_experiment_runs_id'), 'experiment_runs', ['id'], unique=False)
    op.create_index(op.f('ix_experiment_runs_input_hash'), 'experiment_runs', ['input_hash'], unique=False)
    op.create_index(op.f('ix_experiment_runs_status'), 'experiment_runs', ['status'], unique=False)
    op.create_table('observable_summaries',
    sa.Column('id', sa.Integer(), nullable=False),
    sa.Column('run_id', sa.Integer(), nullable=False),
    sa.Column('observable', sa.String(length=50), nullable=False),
    sa.Column('phi_id', sa.String(length=100), nullable=False),
    sa.Column('t', sa.Float(), nullable=False),
    sa.Column('count', sa.Integer(), nullable=False),
    sa.Column('mean', sa.Float(), nullable=False),
    sa.Column('var', sa.Float(), nullable=False),
    sa.Column('stderr', sa.Float(), nullable=False),
    sa.Column('reference', sa.Float(), nullable=True),
    sa.ForeignKeyConstraint(['run_id'], ['experiment_runs.id'], name=op.f('observable_summaries_run_id_fkey'), ondelete='CASCADE'),
    sa.PrimaryKeyConstraint('id', name=op.f('pk_observable_summaries')),
    sa.UniqueConstraint('run_id', 'observable', 'phi_id', 't', name='uq_summary_sample')
    )
    op.create_index('idx_summary_observable', 'observable_summaries', ['observable', 'phi_id'], unique=False)
    op.create_index(op.f('ix_observable_summaries_id'), 'observable_summaries', ['id'], unique=False)
    op.create_index(op.f('ix_observable_summaries_run_id'), 'observable_summaries', ['run_id'], unique=False)
    op.create_table('check_results',
    sa.Column('id', sa.Integer(), nullable=False),
    sa.Column('run_id', sa.Integer(), nullable=False),
    sa.Column('check_name', sa.String(length=50), nullable=False),
    sa.Column('statistic', sa.String(length=20), nullable=False),
    sa.Column('observable', sa.String(length=50), nullable=False),
    sa.Column('phi_id', sa.String(length=100), nullable=False),
    sa.Column('t', sa.Float(), nullable=False),
    sa.Column('value', sa.Float(), nullable=False),
    sa.Column('reference', sa.Float(), nullable=True),
    sa.Column('abs_err', sa.Float(), nullable=True),
    sa.Column('tolerance', sa.Float(), nullable=False),
    sa.Column('status', sa.Enum('PASS', 'FAIL', 'INFO', name='checkstatus'), nullable=False),
    sa.Column('operands', json_type, nullable=True),
    sa.ForeignKeyConstraint(['run_id'], ['experiment_runs.id'], name=op.f('check_results_run_id_fkey'), ondelete='CASCADE'),
    sa.PrimaryKeyConstraint('id', name=op.f('pk_check_results'))
    )
    op.create_index('idx_check_run_status', 'check_results', ['run_id', 'status'], unique=False)
    op.create_index(op.f('ix_check_results_id'), 'check_results', ['id'], unique=False)
    op.create_index(op.f('ix_check_results_run_id'), 'check_results', ['run_id'], unique=False)
    op.create_index(op.f('ix_check_results_status'), 'check_results', ['status'], unique=False)
    # ### end Alembic commands ###


def downgrade() -> None:
    # ### commands auto generated by Alembic - please adjust! ###
    op.drop_index(op.f('ix_check_results_status'), table_name='check_results')
    op.drop_index(op.f('ix_check_results_run_id'), table_name='check_results')
    op.drop_index(op.f('ix_check_results_id'), table_name='check_results')
    op.drop_index('idx_check_run_status', table_name='check_results')
    op.drop_table('check_results')
    op.drop_index(op.f('ix_observable_summaries_run_id'), table_name='observable_summaries')
    op.drop_index(op.f('ix_observable_summaries_id'), table_name='observable_summaries')
    op.drop_index('idx_summary_observable', table_name='observable_summaries')
    op.drop_table('observable_summaries')
    op.drop_index(op.f('ix_experiment_runs_status'), table_name='experiment_runs')
    op.drop_index(op.f('ix_experiment_runs_input_hash'), table_name='experiment_runs')
    op.drop_index(op.f('ix_experiment_runs_id'), table_name='experiment_runs')
    op.drop_index(op.f('ix_experiment_runs_experiment_id'), table_name='experiment_runs')
    op.drop_index('idx_run_experiment_size', table_name='experiment_runs')
    op.drop_table('experiment_runs')
    sa.Enum(name='checkstatus').drop(op.get_bind(), checkfirst=True)
    sa.Enum(name='runstatus').drop(op.get_bind(), checkfirst=True)
    # ### end Alembic commands ###
